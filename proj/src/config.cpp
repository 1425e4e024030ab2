// Reader for the small TOML subset used by system configuration files:
// `[section]` headers, `key = value` pairs with string, number, boolean or
// string-array values, and `#` comments. A `;` separates pairs like a line
// break, so `[system] n=1; f=["-x1"]` is accepted on one line.

#include <cctype>
#include <fstream>
#include <sstream>
#include <variant>

#include "nastab/systems.hpp"

namespace nastab {
namespace {

using Value = std::variant<double, bool, std::string, std::vector<std::string>>;

struct Entry {
  Value value;
  std::size_t line;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

class TomlLite {
 public:
  explicit TomlLite(const std::string& text) : s_(text) {}

  std::map<std::string, Section> parse() {
    std::map<std::string, Section> out;
    std::string current;
    for (;;) {
      skip_blank();
      if (pos_ >= s_.size()) break;
      const char c = s_[pos_];
      if (c == '[') {
        ++pos_;
        current = ident();
        skip_inline_ws();
        if (!take(']')) fail("expected ']' after section name");
        if (out.count(current)) fail("duplicate section [" + current + "]");
        out[current];
        continue;
      }
      if (current.empty()) fail("key outside of any section");
      const std::size_t line = line_;
      std::string key = ident();
      skip_inline_ws();
      if (!take('=')) fail("expected '=' after key '" + key + "'");
      skip_inline_ws();
      Value v = value();
      auto& sec = out[current];
      if (sec.count(key)) fail("duplicate key '" + key + "'");
      sec.emplace(std::move(key), Entry{std::move(v), line});
      skip_inline_ws();
      if (pos_ < s_.size() && s_[pos_] == '#') skip_comment();
      if (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != ';' &&
          s_[pos_] != '\r') {
        fail("unexpected text after value");
      }
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

  bool take(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_comment() {
    while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
  }

  void skip_inline_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  void skip_blank() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == ';') {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  std::string ident() {
    skip_inline_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return s_.substr(start, pos_ - start);
  }

  std::string quoted() {
    if (!take('"')) fail("expected '\"'");
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\n') fail("unterminated string");
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
        ++pos_;
        const char e = s_[pos_];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += s_[pos_];
      }
      ++pos_;
    }
    if (!take('"')) fail("unterminated string");
    return out;
  }

  Value value() {
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return quoted();
    if (c == '[') {
      ++pos_;
      std::vector<std::string> items;
      for (;;) {
        skip_blank();
        if (take(']')) break;
        items.push_back(quoted());
        skip_blank();
        if (take(',')) continue;
        skip_blank();
        if (!take(']')) fail("expected ',' or ']' in array");
        break;
      }
      return items;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != ';' && s_[pos_] != '#') {
      ++pos_;
    }
    const std::string word = s_.substr(start, pos_ - start);
    if (word == "true") return true;
    if (word == "false") return false;
    try {
      std::size_t used = 0;
      const double v = std::stod(word, &used);
      if (used == word.size()) return v;
    } catch (const std::exception&) {
    }
    fail("cannot read value '" + word + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class SectionReader {
 public:
  SectionReader(std::string name, Section* sec)
      : name_(std::move(name)), sec_(sec) {}

  bool has(const std::string& key) const { return sec_->count(key) > 0; }

  std::string text(const std::string& key) {
    return get<std::string>(key, "a string");
  }
  double number(const std::string& key) { return get<double>(key, "a number"); }
  bool flag(const std::string& key) { return get<bool>(key, "true or false"); }
  std::vector<std::string> list(const std::string& key) {
    return get<std::vector<std::string>>(key, "an array of strings");
  }

  Expression expression(const std::string& key, int n) {
    const std::size_t line = sec_->at(key).line;
    const std::string src = text(key);
    try {
      return parse(src, n);
    } catch (const ParseError& e) {
      throw ConfigError("config line " + std::to_string(line) + ": [" + name_ +
                        "] " + key + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, entry] : *sec_) {
      if (!entry.used) {
        throw ConfigError("config line " + std::to_string(entry.line) +
                          ": unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  template <class T>
  T get(const std::string& key, const char* what) {
    auto it = sec_->find(key);
    if (it == sec_->end()) {
      throw ConfigError("[" + name_ + "] is missing required key '" + key + "'");
    }
    it->second.used = true;
    if (const T* v = std::get_if<T>(&it->second.value)) return *v;
    throw ConfigError("config line " + std::to_string(it->second.line) + ": [" +
                      name_ + "] " + key + " must be " + what);
  }

  std::string name_;
  Section* sec_;
};

}  // namespace

LoadedConfig load_config(const std::string& text) {
  auto sections = TomlLite(text).parse();
  for (const auto& [name, sec] : sections) {
    if (name != "system" && name != "certificate" && name != "matrosov" &&
        name != "example17") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  if (!sections.count("system")) throw ConfigError("missing [system] section");

  LoadedConfig cfg;
  SectionReader sys("system", &sections["system"]);
  const double n_value = sys.number("n");
  if (n_value < 1 || n_value != static_cast<int>(n_value)) {
    throw ConfigError("[system] n must be a positive integer");
  }
  const int n = static_cast<int>(n_value);
  const double radius = sys.has("domain_radius") ? sys.number("domain_radius") : 1.0;

  if (sections.count("example17")) {
    if (sys.has("f")) {
      throw ConfigError("[example17] defines f; remove f from [system]");
    }
    if (sections.count("certificate")) {
      throw ConfigError("[example17] defines the certificate; remove [certificate]");
    }
    SectionReader ex("example17", &sections["example17"]);
    Example17Params p;
    p.n = n;
    p.beta = ex.has("beta") ? ex.expression("beta", 1) : parse("exp(-t)", 1);
    p.h = ex.has("h") ? ex.expression("h", 1) : parse("x1^2", 1);
    if (ex.has("M1")) p.M1 = ex.number("M1");
    ex.finish();
    cfg = make_example17(p, radius);
    if (sys.has("label")) cfg.system.label = sys.text("label");
  } else {
    cfg.system.n = n;
    cfg.system.domain_radius = radius;
    const auto rhs = sys.list("f");
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      try {
        cfg.system.f.push_back(parse(rhs[i], n));
      } catch (const ParseError& e) {
        throw ConfigError("[system] f[" + std::to_string(i) + "]: " + e.what());
      }
    }
    cfg.system.label = sys.has("label") ? sys.text("label") : "config";
  }
  if (sys.has("origin_is_equilibrium")) {
    cfg.system.origin_is_equilibrium = sys.flag("origin_is_equilibrium");
  }
  sys.finish();
  validate_system(cfg.system);

  if (sections.count("certificate")) {
    SectionReader c("certificate", &sections["certificate"]);
    Certificate cert;
    cert.V = c.expression("V", n);
    cert.Wstar = ScalarField(c.has("Wstar") ? c.expression("Wstar", n) : parse("0", n));
    cert.V1 = c.expression("V1", n);
    cert.V2 = c.expression("V2", n);
    if (c.has("V3")) cert.V3 = ScalarField(c.expression("V3", n));
    cert.M = c.has("M") ? c.expression("M", n) : parse("0", n);
    if (c.has("mode")) cert.mode = parse_mode(c.text("mode"));
    if (c.has("tail_rate") || c.has("tail_scale")) {
      cert.tail = TailModel{c.expression("tail_rate", n),
                            c.expression("tail_scale", n)};
      if (cert.tail->rate.max_variable() > 0) {
        throw ConfigError("[certificate] tail_rate must depend on t only");
      }
    }
    c.finish();
    cfg.certificate = std::move(cert);
  }
  if (cfg.certificate) validate_certificate(*cfg.certificate, cfg.system);

  if (sections.count("matrosov")) {
    SectionReader m("matrosov", &sections["matrosov"]);
    MatrosovData md;
    md.W = m.expression("W", n);
    md.Vstar = m.expression("Vstar", n);
    if (m.has("alpha")) md.alpha = m.number("alpha");
    if (m.has("A")) md.A = m.number("A");
    if (m.has("r1")) md.r1 = m.number("r1");
    if (m.has("xi")) md.xi = m.number("xi");
    if (m.has("L")) md.L = m.number("L");
    if (m.has("zero_tol")) md.zero_tol = m.number("zero_tol");
    if (m.has("E_distance")) md.E_distance = m.expression("E_distance", n);
    m.finish();
    validate_matrosov(md, cfg.system);
    cfg.matrosov = std::move(md);
  }
  return cfg;
}

LoadedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

}  // namespace nastab
