#include "propsel/cli.hpp"

#include "propsel/errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace propsel::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640, kHeight = 360, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string svg_open(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  return s.str();
}

std::string axes(double y_max, const std::string& x_label, const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::ostringstream s;
  s << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4.0;
    const double y = y0 - (y0 - y1) * i / 4.0;
    s << "<text x=\"" << x0 - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  s << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">" << x_label
    << "</text>\n"
    << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n";
  return s.str();
}

}  // namespace

std::vector<fs::path> plot_attention(const json& trace, const fs::path& out_dir) {
  if (!trace.is_object() || !trace.contains("hops") || !trace.at("hops").is_object())
    throw DataError("attention trace must be an object with a \"hops\" object");
  std::set<long> gold;
  if (trace.contains("gold"))
    for (const auto& g : trace.at("gold")) gold.insert(g.get<long>());
  const std::string id = trace.value("id", "");

  std::map<int, std::map<long, double>> hops;
  try {
    for (const auto& [hop, weights] : trace.at("hops").items())
      for (const auto& [idx, w] : weights.items()) hops[std::stoi(hop)][std::stol(idx)] = w.get<double>();
  } catch (const std::exception& e) {
    throw DataError(std::string("malformed attention trace: ") + e.what());
  }
  long n = trace.value("sentence_count", 0L);
  for (const auto& [hop, weights] : hops)
    if (!weights.empty()) n = std::max(n, weights.rbegin()->first + 1);
  if (n == 0) n = 1;

  fs::create_directories(out_dir);
  std::vector<fs::path> files;
  for (const auto& [hop, weights] : hops) {
    double y_max = 0.0;
    for (const auto& [idx, w] : weights) y_max = std::max(y_max, w);
    y_max = y_max > 0 ? y_max * 1.1 : 1.0;
    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    const double slot = plot_w / static_cast<double>(n);

    std::ostringstream s;
    s << svg_open("Question attention, hop " + std::to_string(hop) + (id.empty() ? "" : " (" + id + ")"));
    s << axes(y_max, "sentence index", "attention weight");
    for (const auto& [idx, w] : weights) {
      const double h = plot_h * w / y_max;
      const double x = kLeft + slot * static_cast<double>(idx) + slot * 0.1;
      s << "<rect x=\"" << x << "\" y=\"" << kHeight - kBottom - h << "\" width=\"" << slot * 0.8 << "\" height=\"" << h
        << "\" fill=\"" << (gold.count(idx) ? "#d62728" : "#7f7f7f") << "\"/>\n";
    }
    const long step = std::max(1L, n / 20);
    for (long i = 0; i < n; i += step)
      s << "<text x=\"" << kLeft + slot * (static_cast<double>(i) + 0.5) << "\" y=\"" << kHeight - kBottom + 15
        << "\" text-anchor=\"middle\">" << i << "</text>\n";
    s << "</svg>\n";
    const fs::path file = out_dir / ("attention_hop" + std::to_string(hop) + ".svg");
    write_file(file, s.str());
    files.push_back(file);
  }
  return files;
}

fs::path plot_thresholds(const std::string& csv, const fs::path& out_dir) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("threshold,em,precision,recall,f1", 0) != 0)
    throw DataError("threshold CSV must start with the header threshold,em,precision,recall,f1");
  std::vector<std::array<double, 5>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::array<double, 5> r{};
    std::string cell;
    for (auto& v : r) {
      if (!std::getline(cells, cell, ',')) throw DataError("threshold CSV row has too few columns: " + line);
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError("threshold CSV cell is not a number: " + cell);
      }
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw DataError("threshold CSV has no rows");
  std::sort(rows.begin(), rows.end());
  const double lo = rows.front()[0], hi = rows.back()[0];
  const double span = hi > lo ? hi - lo : 1.0;
  const double plot_w = kWidth - kLeft - kRight - 90, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double t) { return kLeft + plot_w * (t - lo) / span; };
  auto py = [&](double v) { return kHeight - kBottom - plot_h * v; };

  static const std::array<const char*, 4> names = {"EM", "precision", "recall", "f1"};
  static const std::array<const char*, 4> colors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  std::ostringstream s;
  s << svg_open("Threshold sweep");
  s << axes(1.0, "threshold", "score");
  for (double t : {lo, (lo + hi) / 2, hi})
    s << "<text x=\"" << px(t) << "\" y=\"" << kHeight - kBottom + 15 << "\" text-anchor=\"middle\">" << fmt(t)
      << "</text>\n";
  for (std::size_t m = 0; m < names.size(); ++m) {
    s << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colors[m] << "\" points=\"";
    for (const auto& r : rows) s << px(r[0]) << ',' << py(r[m + 1]) << ' ';
    s << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(m);
    s << "<line x1=\"" << kWidth - 100 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - 80 << "\" y2=\"" << ly
      << "\" stroke-width=\"2\" stroke=\"" << colors[m] << "\"/>\n"
      << "<text x=\"" << kWidth - 75 << "\" y=\"" << ly + 4 << "\">" << names[m] << "</text>\n";
  }
  s << "</svg>\n";
  fs::create_directories(out_dir);
  const fs::path file = out_dir / "thresholds.svg";
  write_file(file, s.str());
  return file;
}

}  // namespace propsel::cli
