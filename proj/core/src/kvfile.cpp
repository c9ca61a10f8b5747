#include "biasscope/kvfile.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "biasscope/error.hpp"

namespace biasscope {
namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view src) : src_(src) {}

  bool done() const { return pos_ >= src_.size(); }
  char peek() const { return done() ? '\0' : src_[pos_]; }
  std::size_t line() const { return line_; }

  char get() {
    const char c = src_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  // Spaces and tabs only; newlines are significant outside arrays.
  void skip_blank() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!done() && peek() != '\n') get();
    }
  }

  // Whitespace, newlines and comments (used inside arrays).
  void skip_all() {
    while (!done()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& reason) const {
    throw Error(Errc::Malformed, "line " + std::to_string(line_) + ": " + reason).at_line(line_);
  }

  std::string read_string() {
    if (get() != '"') fail("expected '\"'");
    std::string out;
    while (true) {
      if (done()) fail("unterminated string");
      if (peek() == '\n') fail("newline inside string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (done()) fail("unterminated escape");
        const char e = get();
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  std::string read_bare() {
    std::string out;
    while (!done()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '+') {
        out.push_back(get());
      } else {
        break;
      }
    }
    return out;
  }

  KvValue read_value() {
    const char c = peek();
    if (c == '"') return read_string();
    if (c == '[') {
      get();
      std::vector<std::string> items;
      skip_all();
      while (peek() != ']') {
        if (done()) fail("unterminated array");
        if (peek() != '"') fail("arrays may only contain strings");
        items.push_back(read_string());
        skip_all();
        if (peek() == ',') {
          get();
          skip_all();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      get();
      return items;
    }
    const std::string bare = read_bare();
    if (bare.empty()) fail("missing value");
    if (bare == "true") return true;
    if (bare == "false") return false;
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(bare.data(), bare.data() + bare.size(), iv);
    if (ec == std::errc() && p == bare.data() + bare.size()) return iv;
    try {
      std::size_t used = 0;
      const double dv = std::stod(bare, &used);
      if (used == bare.size()) return dv;
    } catch (const std::exception&) {
    }
    fail("unrecognized value '" + bare + "'");
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

KvFile KvFile::parse(std::string_view content) {
  KvFile file;
  Cursor cur(content);
  std::string section;

  while (true) {
    cur.skip_all();
    if (cur.done()) break;

    if (cur.peek() == '[') {
      cur.get();
      cur.skip_blank();
      section = cur.read_bare();
      cur.skip_blank();
      if (section.empty() || cur.peek() != ']') cur.fail("malformed section header");
      cur.get();
      bool seen = false;
      for (const auto& s : file.sections_) seen = seen || s == section;
      if (seen) cur.fail("duplicate section [" + section + "]");
      file.sections_.push_back(section);
    } else {
      const std::size_t key_line = cur.line();
      std::string key = cur.read_bare();
      if (key.empty()) cur.fail("expected key");
      cur.skip_blank();
      if (cur.peek() != '=') cur.fail("expected '=' after key '" + key + "'");
      cur.get();
      cur.skip_blank();
      KvValue value = cur.read_value();
      const std::string full = section.empty() ? key : section + "." + key;
      if (file.values_.count(full)) {
        throw Error(Errc::Malformed, "line " + std::to_string(key_line) + ": duplicate key '" + full + "'")
            .at_line(key_line);
      }
      file.values_.emplace(full, std::move(value));
    }

    cur.skip_blank();
    cur.skip_comment();
    if (!cur.done() && cur.peek() != '\n') cur.fail("trailing characters");
  }
  return file;
}

KvFile KvFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what()).at_line(e.line());
  }
}

std::vector<std::string> KvFile::keys_in(std::string_view section) const {
  std::vector<std::string> keys;
  const std::string prefix = std::string(section) + ".";
  for (const auto& [k, v] : values_) {
    if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0 &&
        k.find('.', prefix.size()) == std::string::npos) {
      keys.push_back(k.substr(prefix.size()));
    }
  }
  return keys;
}

std::optional<std::string> KvFile::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error(Errc::Malformed, "key '" + key + "' must be a string");
}

std::optional<std::int64_t> KvFile::get_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
  throw Error(Errc::Malformed, "key '" + key + "' must be an integer");
}

std::optional<double> KvFile::get_number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  throw Error(Errc::Malformed, "key '" + key + "' must be a number");
}

std::optional<bool> KvFile::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* b = std::get_if<bool>(&it->second)) return *b;
  throw Error(Errc::Malformed, "key '" + key + "' must be true or false");
}

std::optional<std::vector<std::string>> KvFile::get_strings(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
  throw Error(Errc::Malformed, "key '" + key + "' must be an array of strings");
}

}  // namespace biasscope
