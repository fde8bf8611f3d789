#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace propsel {

/// Bad input data: malformed JSON, caches, vector files, or records that
/// violate the corpus invariants.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON in a raw corpus file. `record_index` is the zero-based
/// position of the record being read when parsing failed.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t record_index)
      : DataError(what), record_index_(record_index) {}
  std::size_t record_index() const { return record_index_; }

 private:
  std::size_t record_index_;
};

/// A syntactically valid record that cannot become an Example.
class IngestError : public DataError {
 public:
  IngestError(const std::string& what, std::string record_id)
      : DataError(what), record_id_(std::move(record_id)) {}
  const std::string& record_id() const { return record_id_; }

 private:
  std::string record_id_;
};

/// Missing key in a precomputed embedding store.
class LookupError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid configuration. Carries every problem found, one per field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  explicit ConfigError(const std::string& problem)
      : ConfigError(std::vector<std::string>{problem}) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Non-finite value produced during a forward pass.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int hop, int node)
      : std::runtime_error(what), hop_(hop), node_(node) {}
  int hop() const { return hop_; }
  int node() const { return node_; }

 private:
  int hop_;
  int node_;
};

}  // namespace propsel
