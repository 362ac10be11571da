#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ebl/extended_real.hpp"
#include "ebl/function_spec.hpp"
#include "ebl/gaussian_set.hpp"

namespace ebl::scenario {

using json = nlohmann::json;

/// One step of a path into a JSON document: an object key or an array index.
using PathToken = std::variant<std::string, std::size_t>;

/// Dotted rendering such as "functions.f[1].b".
std::string render_path(const std::vector<PathToken>& path);

/// 1-based line of the value addressed by `path` in the JSON text (best effort:
/// the deepest existing ancestor when the path does not exist).
int locate_line(const std::string& text, const std::vector<PathToken>& path);

/// Schema violation at a field. `line` is filled in once the source text is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::vector<PathToken> path, const std::string& message);

  const std::vector<PathToken>& path() const { return path_; }
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  /// Re-renders what() as "origin:line: path: message".
  void anchor(const std::string& origin, int line);
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  std::vector<PathToken> path_;
  std::string message_;
  int line_ = 0;
  std::string what_;
};

/// Read-only view of a JSON value that remembers where it lives, so every
/// accessor can report schema errors with a field path.
class Field {
 public:
  Field(const json& value, std::vector<PathToken> path) : value_(&value), path_(std::move(path)) {}

  const json& raw() const { return *value_; }
  const std::vector<PathToken>& path() const { return path_; }
  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, message); }

  bool has(const std::string& key) const;
  Field at(const std::string& key) const;                   // required member
  std::optional<Field> find(const std::string& key) const;  // optional member
  Field at(std::size_t index) const;
  std::size_t size() const;  // array length (fails unless an array)

  double number() const;  // finite or "inf" / "-inf" strings
  double finite() const;
  double positive() const;
  std::int64_t integer() const;
  std::uint64_t unsigned_integer() const;
  bool boolean() const;
  std::string string() const;
  Vector vector() const;  // array of numbers
  /// Rejects members outside `allowed` (catches typos).
  void only(std::initializer_list<const char*> allowed) const;

 private:
  const json* value_;
  std::vector<PathToken> path_;
};

/// Numbers with +-inf encoded as strings, since JSON has no infinities.
json number_to_json(double v);
json extended_to_json(ExtendedReal v);
json vector_to_json(const Vector& v);

json function_to_json(const FunctionSpec& f);
json set_to_json(const GaussianSet& s);

/// Parses every function kind, including the construction-only kinds
/// "reflect" and "indicator". Representation errors become ConfigError.
FunctionSpec function_from_json(const Field& field);
GaussianSet set_from_json(const Field& field);

/// The set whose indicator f is, when f is an indicator representation.
std::optional<GaussianSet> indicator_set(const FunctionSpec& f);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ebl::scenario
