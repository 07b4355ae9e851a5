#include "skillproof/source_lexer.hpp"

#include <cctype>
#include <cstring>
#include <vector>

namespace skillproof {

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::kPython: return "python";
    case Language::kShell: return "shell";
    case Language::kNode: return "node";
  }
  return "python";
}

std::optional<Language> parse_language(std::string_view name) {
  if (name == "python") return Language::kPython;
  if (name == "shell") return Language::kShell;
  if (name == "node") return Language::kNode;
  return std::nullopt;
}

std::optional<Language> language_for_extension(std::string_view ext) {
  if (ext == ".py") return Language::kPython;
  if (ext == ".sh" || ext == ".bash") return Language::kShell;
  if (ext == ".js" || ext == ".mjs" || ext == ".cjs" || ext == ".ts") return Language::kNode;
  return std::nullopt;
}

std::optional<Language> language_for_shebang(std::string_view first_line) {
  if (!first_line.starts_with("#!")) return std::nullopt;
  auto contains_word = [&](std::string_view w) {
    auto pos = first_line.find(w);
    while (pos != std::string_view::npos) {
      bool left = pos == 0 || first_line[pos - 1] == '/' || first_line[pos - 1] == ' ';
      auto after = pos + w.size();
      bool right = after == first_line.size() || first_line[after] == ' ' ||
                   std::isdigit(static_cast<unsigned char>(first_line[after])) ||
                   first_line[after] == '\r' || first_line[after] == '.';
      if (left && right) return true;
      pos = first_line.find(w, pos + 1);
    }
    return false;
  };
  if (contains_word("python")) return Language::kPython;
  if (contains_word("node")) return Language::kNode;
  if (contains_word("bash") || contains_word("sh") || contains_word("zsh") ||
      contains_word("dash")) {
    return Language::kShell;
  }
  return std::nullopt;
}

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         (static_cast<unsigned char>(c) & 0x80);
}

class Blanker {
 public:
  explicit Blanker(std::string_view src) : src_(src), out_{std::string(src), std::string(src)} {}

  void comment(std::size_t i) {
    if (src_[i] != '\n') {
      out_.stripped[i] = ' ';
      out_.masked[i] = ' ';
    }
  }
  void literal(std::size_t i) {
    if (src_[i] != '\n') out_.masked[i] = ' ';
  }
  LexedSource take() { return std::move(out_); }

 private:
  std::string_view src_;
  LexedSource out_;
};

// ---------------------------------------------------------------- python

class PythonLexer {
 public:
  explicit PythonLexer(std::string_view src) : src_(src), b_(src) {}

  LexedSource run() {
    std::size_t i = 0;
    const std::size_t n = src_.size();
    while (i < n) {
      char c = src_[i];
      if (c == '#') {
        while (i < n && src_[i] != '\n') b_.comment(i++);
        continue;
      }
      if (c == '\'' || c == '"') {
        i = string_at(i, "");
        continue;
      }
      if (is_ident_char(c)) {
        std::size_t k = i;
        while (k < n && k - i < 2 && std::strchr("rRbBuUfF", src_[k]) && src_[k] != '\0') ++k;
        if (k > i && k < n && (src_[k] == '\'' || src_[k] == '"')) {
          i = string_at(k, src_.substr(i, k - i));
          continue;
        }
        while (i < n && is_ident_char(src_[i])) ++i;
        continue;
      }
      ++i;
    }
    return b_.take();
  }

 private:
  // `q` is the opening quote. Returns the index after the closing quote.
  std::size_t string_at(std::size_t q, std::string_view prefix) {
    const std::size_t n = src_.size();
    const char quote = src_[q];
    const bool triple = q + 2 < n && src_[q + 1] == quote && src_[q + 2] == quote;
    const bool fstring = prefix.find_first_of("fF") != std::string_view::npos;
    std::size_t i = q + (triple ? 3 : 1);
    while (i < n) {
      char c = src_[i];
      if (c == '\\' && i + 1 < n) {
        b_.literal(i);
        b_.literal(i + 1);
        i += 2;
        continue;
      }
      if (triple && c == quote && i + 2 < n && src_[i + 1] == quote && src_[i + 2] == quote) {
        return i + 3;
      }
      if (!triple && c == quote) return i + 1;
      if (!triple && c == '\n') return i;  // unterminated
      if (fstring && c == '{') {
        if (i + 1 < n && src_[i + 1] == '{') {
          b_.literal(i);
          b_.literal(i + 1);
          i += 2;
          continue;
        }
        // Interpolated expression: kept as code.
        int depth = 0;
        while (i < n) {
          if (src_[i] == '{') ++depth;
          if (src_[i] == '}' && --depth == 0) break;
          if (!triple && src_[i] == '\n') break;
          ++i;
        }
        if (i < n && src_[i] == '}') ++i;
        continue;
      }
      b_.literal(i);
      ++i;
    }
    return i;
  }

  std::string_view src_;
  Blanker b_;
};

// ------------------------------------------------------------------ node

class NodeLexer {
 public:
  explicit NodeLexer(std::string_view src) : src_(src), b_(src) {}

  LexedSource run() {
    code(0, false);
    return b_.take();
  }

 private:
  bool regex_allowed() const {
    if (last_sig_ == 0) return true;
    if (std::strchr("(,=:[!&|?{};+-*%<>~^", last_sig_) != nullptr) return true;
    static constexpr std::string_view kKeywords[] = {"return", "typeof", "case", "in", "of",
                                                     "new", "delete", "void", "throw", "else",
                                                     "yield", "await"};
    if (is_ident_char(last_sig_)) {
      for (auto kw : kKeywords) {
        if (last_word_ == kw) return true;
      }
    }
    return false;
  }

  // Scans code from `i`. When `nested`, stops after the '}' that closes a
  // template interpolation and returns the index after it.
  std::size_t code(std::size_t i, bool nested) {
    const std::size_t n = src_.size();
    int depth = 0;
    while (i < n) {
      char c = src_[i];
      char next = i + 1 < n ? src_[i + 1] : '\0';
      if (c == '/' && next == '/') {
        while (i < n && src_[i] != '\n') b_.comment(i++);
        continue;
      }
      if (c == '/' && next == '*') {
        b_.comment(i++);
        b_.comment(i++);
        while (i < n && !(src_[i] == '*' && i + 1 < n && src_[i + 1] == '/')) b_.comment(i++);
        if (i < n) {
          b_.comment(i++);
          b_.comment(i++);
        }
        continue;
      }
      if (c == '\'' || c == '"') {
        i = quoted(i);
        last_sig_ = c;
        continue;
      }
      if (c == '`') {
        i = template_literal(i);
        last_sig_ = '`';
        continue;
      }
      if (c == '/' && regex_allowed()) {
        i = regex_literal(i);
        last_sig_ = '/';
        last_word_.clear();
        continue;
      }
      if (is_ident_char(c)) {
        std::size_t start = i;
        while (i < n && is_ident_char(src_[i])) ++i;
        last_word_ = std::string(src_.substr(start, i - start));
        last_sig_ = src_[i - 1];
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}') {
        if (nested && depth == 0) return i + 1;
        --depth;
      }
      if (!std::isspace(static_cast<unsigned char>(c))) {
        last_sig_ = c;
        last_word_.clear();
      }
      ++i;
    }
    return i;
  }

  std::size_t quoted(std::size_t q) {
    const std::size_t n = src_.size();
    const char quote = src_[q];
    std::size_t i = q + 1;
    while (i < n) {
      if (src_[i] == '\\' && i + 1 < n) {
        b_.literal(i);
        b_.literal(i + 1);
        i += 2;
        continue;
      }
      if (src_[i] == quote) return i + 1;
      if (src_[i] == '\n') return i;
      b_.literal(i++);
    }
    return i;
  }

  std::size_t template_literal(std::size_t q) {
    const std::size_t n = src_.size();
    std::size_t i = q + 1;
    while (i < n) {
      if (src_[i] == '\\' && i + 1 < n) {
        b_.literal(i);
        b_.literal(i + 1);
        i += 2;
        continue;
      }
      if (src_[i] == '`') return i + 1;
      if (src_[i] == '$' && i + 1 < n && src_[i + 1] == '{') {
        char saved = last_sig_;
        last_sig_ = '{';
        i = code(i + 2, true);
        last_sig_ = saved;
        continue;
      }
      b_.literal(i++);
    }
    return i;
  }

  std::size_t regex_literal(std::size_t q) {
    const std::size_t n = src_.size();
    std::size_t i = q + 1;
    bool in_class = false;
    while (i < n && src_[i] != '\n') {
      char c = src_[i];
      if (c == '\\' && i + 1 < n) {
        b_.literal(i);
        b_.literal(i + 1);
        i += 2;
        continue;
      }
      if (c == '[') in_class = true;
      if (c == ']') in_class = false;
      if (c == '/' && !in_class) {
        ++i;
        while (i < n && std::isalpha(static_cast<unsigned char>(src_[i]))) ++i;
        return i;
      }
      b_.literal(i++);
    }
    return i;
  }

  std::string_view src_;
  Blanker b_;
  char last_sig_ = 0;
  std::string last_word_;
};

// ----------------------------------------------------------------- shell

class ShellLexer {
 public:
  explicit ShellLexer(std::string_view src) : src_(src), b_(src) {}

  LexedSource run() {
    code(0, false);
    return b_.take();
  }

 private:
  struct PendingHeredoc {
    std::string delimiter;
    bool quoted;
    bool strip_tabs;
  };

  static bool word_start_before(char prev) { return std::strchr(" \t\n;|&()", prev) != nullptr; }

  // Scans code. When `nested` (inside "$(...)"), returns after the matching ')'.
  std::size_t code(std::size_t i, bool nested) {
    const std::size_t n = src_.size();
    int depth = 0;
    while (i < n) {
      char c = src_[i];
      if (c == '#' && (i == 0 || word_start_before(src_[i - 1]))) {
        while (i < n && src_[i] != '\n') b_.comment(i++);
        continue;
      }
      if (c == '\\' && i + 1 < n) {
        i += 2;
        continue;
      }
      if (c == '\'') {
        ++i;
        while (i < n && src_[i] != '\'') b_.literal(i++);
        if (i < n) ++i;
        continue;
      }
      if (c == '"') {
        i = double_quoted(i + 1, '"');
        continue;
      }
      if (c == '<' && i + 2 < n && src_[i + 1] == '<' && src_[i + 2] != '<') {
        i = heredoc_operator(i + 2);
        continue;
      }
      if (c == '\n') {
        ++i;
        for (const auto& h : pending_) i = heredoc_body(i, h);
        pending_.clear();
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')') {
        if (nested && depth == 0) return i + 1;
        --depth;
      }
      ++i;
    }
    return i;
  }

  // Double-quoted body (or unquoted heredoc body when `end` is '\0'):
  // literal text is masked, command substitutions stay visible.
  std::size_t double_quoted(std::size_t i, char end) {
    const std::size_t n = src_.size();
    while (i < n) {
      char c = src_[i];
      if (end != '\0' && c == end) return i + 1;
      if (c == '\\' && i + 1 < n) {
        b_.literal(i);
        b_.literal(i + 1);
        i += 2;
        continue;
      }
      if (c == '$' && i + 1 < n && src_[i + 1] == '(') {
        i = code(i + 2, true);
        continue;
      }
      if (c == '`') {
        ++i;
        while (i < n && src_[i] != '`') ++i;
        if (i < n) ++i;
        continue;
      }
      if (c == '$') {  // parameter expansion stays visible
        ++i;
        if (i < n && src_[i] == '{') {
          while (i < n && src_[i] != '}') ++i;
          if (i < n) ++i;
        } else {
          while (i < n && (is_ident_char(src_[i]))) ++i;
        }
        continue;
      }
      b_.literal(i++);
    }
    return i;
  }

  std::size_t heredoc_operator(std::size_t i) {
    const std::size_t n = src_.size();
    bool strip_tabs = false;
    if (i < n && src_[i] == '-') {
      strip_tabs = true;
      ++i;
    }
    while (i < n && (src_[i] == ' ' || src_[i] == '\t')) ++i;
    bool quoted = false;
    std::string delim;
    if (i < n && (src_[i] == '\'' || src_[i] == '"')) {
      quoted = true;
      char q = src_[i++];
      while (i < n && src_[i] != q && src_[i] != '\n') delim.push_back(src_[i++]);
      if (i < n && src_[i] == q) ++i;
    } else {
      while (i < n && (is_ident_char(src_[i]) || src_[i] == '\\')) {
        if (src_[i] == '\\') quoted = true;
        else delim.push_back(src_[i]);
        ++i;
      }
    }
    if (!delim.empty()) pending_.push_back({delim, quoted, strip_tabs});
    return i;
  }

  std::size_t heredoc_body(std::size_t i, const PendingHeredoc& h) {
    const std::size_t n = src_.size();
    while (i < n) {
      std::size_t eol = src_.find('\n', i);
      if (eol == std::string_view::npos) eol = n;
      std::string_view line = src_.substr(i, eol - i);
      if (h.strip_tabs) {
        while (!line.empty() && line.front() == '\t') line.remove_prefix(1);
      }
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line == h.delimiter) return eol < n ? eol + 1 : n;
      if (h.quoted) {
        for (std::size_t k = i; k < eol; ++k) b_.literal(k);
      } else {
        // Expansions in the body still run.
        std::string_view saved = src_;
        src_ = src_.substr(0, eol);
        double_quoted(i, '\0');
        src_ = saved;
      }
      i = eol < n ? eol + 1 : n;
    }
    return i;
  }

  std::string_view src_;
  Blanker b_;
  std::vector<PendingHeredoc> pending_;
};

}  // namespace

LexedSource lex_source(std::string_view source, Language lang) {
  switch (lang) {
    case Language::kPython: return PythonLexer(source).run();
    case Language::kNode: return NodeLexer(source).run();
    case Language::kShell: return ShellLexer(source).run();
  }
  return {std::string(source), std::string(source)};
}

}  // namespace skillproof
