#include "mwh/filter_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mwh/error.hpp"

namespace mwh {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, "cli", msg); }

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail("missing field '" + std::string(key) + "'" + where);
  return *it;
}

template <class T>
std::vector<T> number_array(const json& j, const std::string& name) {
  if (!j.is_array()) parse_fail("field '" + name + "' must be an array");
  std::vector<T> out;
  for (const json& e : j) {
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer()) parse_fail("field '" + name + "' must contain integers");
    } else {
      if (!e.is_number()) parse_fail("field '" + name + "' must contain numbers");
    }
    out.push_back(e.get<T>());
  }
  return out;
}

}  // namespace

FilterSpec parse_filter_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail("malformed JSON at " + location(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!j.is_object()) parse_fail("top-level value must be an object");
  FilterSpec s;
  if (auto it = j.find("schema"); it != j.end() && !(it->is_number_integer() && it->get<int>() == 1))
    parse_fail("unsupported schema (expected 1)");
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) parse_fail("field 'name' must be a string");
    s.name = it->get<std::string>();
  }
  const json& n = field(j, "n", "");
  if (!n.is_number_integer() || n.get<int>() < 1) parse_fail("field 'n' must be a positive integer");
  s.n = n.get<int>();
  const json& A = field(j, "A", "");
  if (A.is_array())
    for (const json& e : A)
      if (e.is_number_float() && std::floor(e.get<double>()) != e.get<double>())
        throw Error(ErrorCode::NotInteger, "lattice", "field 'A' has a non-integer entry");
  s.A = number_array<std::int64_t>(A, "A");
  if (static_cast<int>(s.A.size()) != s.n * s.n)
    parse_fail("field 'A' must have n*n = " + std::to_string(s.n * s.n) + " entries");
  const json& d = field(j, "d", "");
  if (!d.is_number_integer() || d.get<int>() < 1) parse_fail("field 'd' must be a positive integer");
  s.d = d.get<int>();
  const json& coeffs = field(j, "coeffs", "");
  if (!coeffs.is_array()) parse_fail("field 'coeffs' must be an array");
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const std::string where = " in coeffs[" + std::to_string(i) + "]";
    const json& c = coeffs[i];
    if (!c.is_object()) parse_fail("coeffs[" + std::to_string(i) + "] must be an object");
    CoeffSpec cs;
    cs.index = number_array<int>(field(c, "index", where), "index" + where);
    cs.re = number_array<double>(field(c, "re", where), "re" + where);
    if (auto it = c.find("im"); it != c.end())
      cs.im = number_array<double>(*it, "im" + where);
    else
      cs.im.assign(cs.re.size(), 0.0);
    if (static_cast<int>(cs.index.size()) != s.n) parse_fail("field 'index'" + where + " must have n entries");
    const std::size_t dd = static_cast<std::size_t>(s.d * s.d);
    if (cs.re.size() != dd || cs.im.size() != dd) parse_fail("fields 're'/'im'" + where + " must have d*d entries");
    s.coeffs.push_back(std::move(cs));
  }
  return s;
}

std::string serialize_filter_spec(const FilterSpec& s) {
  json j;
  j["schema"] = 1;
  j["name"] = s.name;
  j["n"] = s.n;
  j["A"] = s.A;
  j["d"] = s.d;
  json cs = json::array();
  for (const CoeffSpec& c : s.coeffs) cs.push_back(json{{"index", c.index}, {"re", c.re}, {"im", c.im}});
  j["coeffs"] = std::move(cs);
  return j.dump(2) + "\n";
}

IMat spec_dilation(const FilterSpec& s) {
  IMat A(s.n, s.n);
  for (int i = 0; i < s.n; ++i)
    for (int k = 0; k < s.n; ++k) A(i, k) = s.A[static_cast<std::size_t>(i * s.n + k)];
  return A;
}

MatTrigPoly spec_filter(const FilterSpec& s) {
  MatTrigPoly m(s.n, s.d);
  for (const CoeffSpec& c : s.coeffs) {
    CMat M(s.d, s.d);
    for (int a = 0; a < s.d; ++a)
      for (int b = 0; b < s.d; ++b) {
        const auto e = static_cast<std::size_t>(a * s.d + b);
        M(a, b) = cplx(c.re[e], c.im[e]);
      }
    m.add(c.index, M);
  }
  return m.prune();
}

FilterSpec make_spec(const std::string& name, const IMat& A, const MatTrigPoly& m) {
  FilterSpec s;
  s.name = name;
  s.n = static_cast<int>(A.rows());
  for (int i = 0; i < s.n; ++i)
    for (int k = 0; k < s.n; ++k) s.A.push_back(A(i, k));
  s.d = m.d();
  for (const auto& [k, M] : m.coeffs()) {
    CoeffSpec c;
    c.index = k;
    for (int a = 0; a < s.d; ++a)
      for (int b = 0; b < s.d; ++b) {
        c.re.push_back(M(a, b).real());
        c.im.push_back(M(a, b).imag());
      }
    s.coeffs.push_back(std::move(c));
  }
  return s;
}

std::vector<std::string> builtin_names() { return {"haar", "haar3", "stretched-haar", "haar2-shift", "d4"}; }

FilterSpec builtin_spec(const std::string& name) {
  IMat A(1, 1);
  A(0, 0) = 2;
  auto scalar = [](double v) { return CMat::Constant(1, 1, v); };
  MatTrigPoly m(1, 1);
  if (name == "haar") {
    m.add({0}, scalar(0.5));
    m.add({1}, scalar(0.5));
  } else if (name == "haar3") {
    m.add({0}, scalar(0.5));
    m.add({3}, scalar(0.5));
  } else if (name == "stretched-haar") {
    m.add({0}, scalar(0.5));
    m.add({2}, scalar(0.5));
  } else if (name == "haar2-shift") {
    m = MatTrigPoly(1, 2);
    CMat M0 = CMat::Zero(2, 2), M1 = CMat::Zero(2, 2), M2 = CMat::Zero(2, 2);
    M0(0, 0) = 0.5;
    M1(0, 0) = 0.5;
    M1(1, 1) = 0.5;
    M2(1, 1) = 0.5;
    m.add({0}, M0);
    m.add({1}, M1);
    m.add({2}, M2);
  } else if (name == "d4") {
    const double r3 = std::sqrt(3.0);
    m.add({0}, scalar((1.0 + r3) / 8.0));
    m.add({1}, scalar((3.0 + r3) / 8.0));
    m.add({2}, scalar((3.0 - r3) / 8.0));
    m.add({3}, scalar((1.0 - r3) / 8.0));
  } else {
    throw Error(ErrorCode::UnknownBuiltin, "cli", "unknown builtin '" + name + "'");
  }
  return make_spec(name, A, m);
}

LoadedFilter load_filter(const FilterSpec& spec) {
  return LoadedFilter{spec, spec_filter(spec), DilationSystem::build(spec_dilation(spec))};
}

LoadedFilter load_filter_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cli", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_filter(parse_filter_spec(ss.str()));
}

LoadedFilter load_builtin(const std::string& name) { return load_filter(builtin_spec(name)); }

}  // namespace mwh
