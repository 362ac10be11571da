#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ebl/errors.hpp"

namespace ebl::scenario {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Walks raw JSON text (already known to be valid) to find where a path points.
class Skimmer {
 public:
  explicit Skimmer(const std::string& text) : s_(text) {}

  std::size_t locate(const std::vector<PathToken>& path) {
    space();
    for (const auto& token : path) {
      const std::size_t here = pos_;
      const bool found = std::holds_alternative<std::string>(token) ? enter_key(std::get<std::string>(token))
                                                                    : enter_index(std::get<std::size_t>(token));
      if (!found) return here;
    }
    return pos_;
  }

 private:
  void space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n' || s_[pos_] == '\r' || s_[pos_] == '\t')) ++pos_;
  }

  std::string string() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') ++pos_;
      if (pos_ < s_.size()) out += s_[pos_++];
    }
    ++pos_;
    return out;
  }

  void value() {
    space();
    if (pos_ >= s_.size()) return;
    const char c = s_[pos_];
    if (c == '"') {
      string();
    } else if (c == '{' || c == '[') {
      const char close = c == '{' ? '}' : ']';
      ++pos_;
      space();
      while (pos_ < s_.size() && s_[pos_] != close) {
        if (c == '{') {
          string();
          space();
          ++pos_;  // colon
        }
        value();
        space();
        if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
        space();
      }
      ++pos_;
    } else {
      while (pos_ < s_.size() && std::string_view(",]} \n\r\t").find(s_[pos_]) == std::string_view::npos) ++pos_;
    }
  }

  bool enter_key(const std::string& key) {
    if (pos_ >= s_.size() || s_[pos_] != '{') return false;
    ++pos_;
    space();
    while (pos_ < s_.size() && s_[pos_] == '"') {
      const std::string k = string();
      space();
      ++pos_;  // colon
      space();
      if (k == key) return true;
      value();
      space();
      if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
      space();
    }
    return false;
  }

  bool enter_index(std::size_t index) {
    if (pos_ >= s_.size() || s_[pos_] != '[') return false;
    ++pos_;
    space();
    for (std::size_t i = 0; i < index; ++i) {
      if (pos_ >= s_.size() || s_[pos_] == ']') return false;
      value();
      space();
      if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
      space();
    }
    return pos_ < s_.size() && s_[pos_] != ']';
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::vector<PathToken> child(const std::vector<PathToken>& path, PathToken token) {
  std::vector<PathToken> out = path;
  out.push_back(std::move(token));
  return out;
}

const char* json_type(const json& j) { return j.type_name(); }

}  // namespace

std::string render_path(const std::vector<PathToken>& path) {
  std::string out;
  for (const auto& token : path) {
    if (const auto* key = std::get_if<std::string>(&token)) {
      if (!out.empty()) out += '.';
      out += *key;
    } else {
      out += '[' + std::to_string(std::get<std::size_t>(token)) + ']';
    }
  }
  return out.empty() ? "<root>" : out;
}

int locate_line(const std::string& text, const std::vector<PathToken>& path) {
  const std::size_t pos = std::min(Skimmer(text).locate(path), text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

ConfigError::ConfigError(std::vector<PathToken> path, const std::string& message)
    : std::runtime_error(message), path_(std::move(path)), message_(message) {
  what_ = render_path(path_) + ": " + message_;
}

void ConfigError::anchor(const std::string& origin, int line) {
  line_ = line;
  what_ = origin + ":" + std::to_string(line) + ": " + render_path(path_) + ": " + message_;
}

bool Field::has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

Field Field::at(const std::string& key) const {
  if (!value_->is_object()) fail(std::string("expected an object, found ") + json_type(*value_));
  const auto it = value_->find(key);
  if (it == value_->end()) fail("missing required field '" + key + "'");
  return Field(*it, child(path_, key));
}

std::optional<Field> Field::find(const std::string& key) const {
  if (!value_->is_object()) fail(std::string("expected an object, found ") + json_type(*value_));
  const auto it = value_->find(key);
  if (it == value_->end()) return std::nullopt;
  return Field(*it, child(path_, key));
}

Field Field::at(std::size_t index) const {
  if (!value_->is_array()) fail(std::string("expected an array, found ") + json_type(*value_));
  if (index >= value_->size()) fail("index " + std::to_string(index) + " out of range");
  return Field((*value_)[index], child(path_, index));
}

std::size_t Field::size() const {
  if (!value_->is_array()) fail(std::string("expected an array, found ") + json_type(*value_));
  return value_->size();
}

double Field::number() const {
  if (value_->is_number()) return value_->get<double>();
  if (value_->is_string()) {
    const auto s = value_->get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(std::string("expected a number, found ") + json_type(*value_));
}

double Field::finite() const {
  const double v = number();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

double Field::positive() const {
  const double v = finite();
  if (!(v > 0.0)) fail("must be > 0");
  return v;
}

std::int64_t Field::integer() const {
  if (!value_->is_number_integer()) fail(std::string("expected an integer, found ") + json_type(*value_));
  return value_->get<std::int64_t>();
}

std::uint64_t Field::unsigned_integer() const {
  if (!value_->is_number_unsigned()) fail("expected a nonnegative integer");
  return value_->get<std::uint64_t>();
}

bool Field::boolean() const {
  if (!value_->is_boolean()) fail(std::string("expected true or false, found ") + json_type(*value_));
  return value_->get<bool>();
}

std::string Field::string() const {
  if (!value_->is_string()) fail(std::string("expected a string, found ") + json_type(*value_));
  return value_->get<std::string>();
}

Vector Field::vector() const {
  Vector out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
  return out;
}

void Field::only(std::initializer_list<const char*> allowed) const {
  if (!value_->is_object()) fail(std::string("expected an object, found ") + json_type(*value_));
  for (const auto& [key, v] : value_->items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(child(path_, key), "unknown field");
    }
  }
}

json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

json extended_to_json(ExtendedReal v) { return number_to_json(v.value()); }

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(number_to_json(x));
  return out;
}

json function_to_json(const FunctionSpec& f) {
  return std::visit(
      [&](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        json j{{"kind", f.kind()}};
        if constexpr (std::is_same_v<T, LinearGaussian> || std::is_same_v<T, HalfspaceIndicator>) {
          j["a"] = vector_to_json(r.a);
          j["b"] = number_to_json(r.b);
        } else if constexpr (std::is_same_v<T, ConcaveComposite>) {
          json pieces = json::array();
          for (const auto& p : r.v.pieces()) pieces.push_back({{"slope", vector_to_json(p.slope)}, {"offset", p.offset}});
          j["pieces"] = pieces;
          if (r.v.domain()) j["domain"] = {{"lo", vector_to_json(r.v.domain()->lo)}, {"hi", vector_to_json(r.v.domain()->hi)}};
        } else if constexpr (std::is_same_v<T, IntervalIndicator>) {
          json ivs = json::array();
          for (const auto& iv : r.intervals) ivs.push_back({number_to_json(iv.lo), number_to_json(iv.hi)});
          j["intervals"] = ivs;
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          j["lo"] = vector_to_json(r.box.lo);
          j["hi"] = vector_to_json(r.box.hi);
        } else if constexpr (std::is_same_v<T, Constant>) {
          j["c"] = r.c;
          j["dim"] = r.dim;
        } else if constexpr (std::is_same_v<T, GridSampled>) {
          j["lo"] = vector_to_json(r.box.lo);
          j["hi"] = vector_to_json(r.box.hi);
          j["shape"] = r.shape;
          j["values"] = vector_to_json(r.values);
          j["encoding"] = r.encoding == GridEncoding::quantile ? "quantile" : "probability";
          j["outside"] = r.outside == GridOutside::minus_infinity ? "minus_infinity" : "extend_constant";
        } else if constexpr (std::is_same_v<T, Complement>) {
          j["of"] = function_to_json(*r.inner);
        }
        return j;
      },
      f.rep());
}

json set_to_json(const GaussianSet& s) {
  return std::visit(
      [](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, HalfspaceSet>) {
          return {{"type", "halfspace"}, {"a", vector_to_json(r.a)}, {"b", number_to_json(r.b)}};
        } else if constexpr (std::is_same_v<T, IntervalUnion>) {
          json ivs = json::array();
          for (const auto& iv : r.intervals) ivs.push_back({number_to_json(iv.lo), number_to_json(iv.hi)});
          return {{"type", "intervals"}, {"intervals", ivs}};
        } else {
          return {{"type", "box"}, {"lo", vector_to_json(r.box.lo)}, {"hi", vector_to_json(r.box.hi)}};
        }
      },
      s);
}

namespace {

std::vector<ClosedInterval> intervals_from(const Field& f) {
  std::vector<ClosedInterval> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Field iv = f.at(i);
    if (iv.size() != 2) iv.fail("an interval is a pair [lo, hi]");
    out.push_back({iv.at(std::size_t{0}).number(), iv.at(std::size_t{1}).number()});
  }
  return out;
}

Box box_from(const Field& f) { return Box{f.at("lo").vector(), f.at("hi").vector()}; }

FunctionSpec build_function(const Field& field) {
  const std::string kind = field.at("kind").string();
  if (kind == "linear_gaussian" || kind == "halfspace") {
    field.only({"kind", "a", "b"});
    const Vector a = field.at("a").vector();
    const double b = field.at("b").finite();
    return kind == "halfspace" ? FunctionSpec::halfspace(a, b) : FunctionSpec::linear_gaussian(a, b);
  }
  if (kind == "concave_composite") {
    field.only({"kind", "pieces", "domain"});
    const Field pieces = field.at("pieces");
    std::vector<AffinePiece> out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const Field p = pieces.at(i);
      p.only({"slope", "offset"});
      out.push_back({p.at("slope").vector(), p.at("offset").finite()});
    }
    std::optional<Box> domain;
    if (const auto d = field.find("domain")) domain = box_from(*d);
    return FunctionSpec::concave_composite(ConcavePWL(std::move(out), std::move(domain)));
  }
  if (kind == "intervals") {
    field.only({"kind", "intervals"});
    return FunctionSpec::intervals(intervals_from(field.at("intervals")));
  }
  if (kind == "box") {
    field.only({"kind", "lo", "hi"});
    return FunctionSpec::box(box_from(field));
  }
  if (kind == "constant") {
    field.only({"kind", "c", "dim"});
    const auto dim = field.find("dim") ? field.at("dim").integer() : 1;
    return FunctionSpec::constant(field.at("c").finite(), static_cast<int>(dim));
  }
  if (kind == "grid") {
    field.only({"kind", "lo", "hi", "shape", "values", "encoding", "outside"});
    GridSampled g;
    g.box = box_from(field);
    const Field shape = field.at("shape");
    for (std::size_t i = 0; i < shape.size(); ++i) g.shape.push_back(static_cast<int>(shape.at(i).integer()));
    g.values = field.at("values").vector();
    if (const auto e = field.find("encoding")) {
      const std::string s = e->string();
      if (s != "probability" && s != "quantile") e->fail("expected 'probability' or 'quantile'");
      g.encoding = s == "quantile" ? GridEncoding::quantile : GridEncoding::probability;
    }
    if (const auto o = field.find("outside")) {
      const std::string s = o->string();
      if (s != "extend_constant" && s != "minus_infinity") o->fail("expected 'extend_constant' or 'minus_infinity'");
      g.outside = s == "minus_infinity" ? GridOutside::minus_infinity : GridOutside::extend_constant;
    }
    return FunctionSpec::grid(std::move(g));
  }
  if (kind == "complement" || kind == "reflect") {
    field.only({"kind", "of"});
    const FunctionSpec inner = function_from_json(field.at("of"));
    return kind == "complement" ? complement(inner) : reflect(inner);
  }
  if (kind == "indicator") {
    field.only({"kind", "set"});
    return set_to_indicator(set_from_json(field.at("set")));
  }
  field.at("kind").fail("unknown function kind '" + kind + "'");
}

}  // namespace

FunctionSpec function_from_json(const Field& field) {
  try {
    return build_function(field);
  } catch (const ebl::Error& e) {
    field.fail(e.what());
  }
}

GaussianSet set_from_json(const Field& field) {
  const std::string type = field.at("type").string();
  try {
    if (type == "halfspace") {
      field.only({"type", "a", "b"});
      return HalfspaceSet{field.at("a").vector(), field.at("b").finite()};
    }
    if (type == "intervals") {
      field.only({"type", "intervals"});
      return normalized(intervals_from(field.at("intervals")));
    }
    if (type == "box") {
      field.only({"type", "lo", "hi"});
      return BoxSet{box_from(field)};
    }
  } catch (const ebl::Error& e) {
    field.fail(e.what());
  }
  field.at("type").fail("unknown set type '" + type + "'");
}

std::optional<GaussianSet> indicator_set(const FunctionSpec& f) {
  if (const auto* iv = f.as<IntervalIndicator>()) return IntervalUnion{iv->intervals};
  if (const auto* bx = f.as<BoxIndicator>()) return BoxSet{bx->box};
  if (const auto* hs = f.as<HalfspaceIndicator>()) return HalfspaceSet{hs->a, hs->b};
  return std::nullopt;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ebl::scenario
