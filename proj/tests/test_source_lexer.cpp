#include <doctest.h>

#include "skillproof/source_lexer.hpp"

using namespace skillproof;

namespace {

void check_aligned(std::string_view src, const LexedSource& l) {
  REQUIRE(l.stripped.size() == src.size());
  REQUIRE(l.masked.size() == src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == '\n') {
      CHECK(l.stripped[i] == '\n');
      CHECK(l.masked[i] == '\n');
    }
  }
}

}  // namespace

TEST_CASE("language detection") {
  CHECK(language_for_extension(".py") == Language::kPython);
  CHECK(language_for_extension(".sh") == Language::kShell);
  CHECK(language_for_extension(".bash") == Language::kShell);
  CHECK(language_for_extension(".mjs") == Language::kNode);
  CHECK(language_for_extension(".ts") == Language::kNode);
  CHECK_FALSE(language_for_extension(".rb").has_value());
  CHECK(language_for_shebang("#!/usr/bin/env python3") == Language::kPython);
  CHECK(language_for_shebang("#!/bin/bash -e") == Language::kShell);
  CHECK(language_for_shebang("#!/usr/bin/env node") == Language::kNode);
  CHECK_FALSE(language_for_shebang("#!/usr/bin/perl").has_value());
  CHECK(parse_language("shell") == Language::kShell);
  CHECK(to_string(Language::kNode) == "node");
}

TEST_CASE("python comments and strings") {
  std::string src = "x = 'a#b'  # open('f', 'w')\ny = \"eval(1)\"\n";
  auto l = lex_source(src, Language::kPython);
  check_aligned(src, l);
  CHECK(l.stripped.find("open") == std::string::npos);
  CHECK(l.stripped.find("'a#b'") != std::string::npos);
  CHECK(l.masked.find("eval") == std::string::npos);
  CHECK(l.masked.find("a#b") == std::string::npos);
  CHECK(l.masked.substr(0, 9) == "x = '   '");
}

TEST_CASE("python triple quotes and f-string interpolation") {
  std::string src = "s = \"\"\"\nrequests.get(u)\n\"\"\"\nf\"{requests.get(u)} text\"\n";
  auto l = lex_source(src, Language::kPython);
  check_aligned(src, l);
  // docstring contents are masked, interpolated code survives
  CHECK(l.masked.find("requests.get(u)}") != std::string::npos);
  CHECK(l.masked.find("text") == std::string::npos);
  auto first = l.masked.find("requests");
  CHECK(first > src.find("\"\"\"\n", 6));
}

TEST_CASE("node comments, template literals and regex literals") {
  std::string src =
      "// fetch('a')\nconst a = `x ${fetch(u)} y`; /* eval(1) */\nconst r = /fetch\\(/g;\n";
  auto l = lex_source(src, Language::kNode);
  check_aligned(src, l);
  CHECK(l.stripped.find("fetch('a')") == std::string::npos);
  CHECK(l.stripped.find("eval") == std::string::npos);
  CHECK(l.masked.find("${fetch(u)}") != std::string::npos);
  CHECK(l.masked.find(" y`") == std::string::npos);
  CHECK(l.masked.find("fetch\\(") == std::string::npos);
}

TEST_CASE("shell comments, quotes and heredocs") {
  std::string src =
      "echo 'curl x' # curl y\n"
      "echo \"$(curl https://a.com) text\"\n"
      "cat <<EOF\ncurl https://b.com\nEOF\n"
      "echo a#b\n";
  auto l = lex_source(src, Language::kShell);
  check_aligned(src, l);
  CHECK(l.stripped.find("curl y") == std::string::npos);
  CHECK(l.masked.find("'curl x'") == std::string::npos);
  CHECK(l.masked.find("$(curl https://a.com)") != std::string::npos);
  CHECK(l.masked.find("text") == std::string::npos);
  CHECK(l.masked.find("b.com") == std::string::npos);
  CHECK(l.stripped.find("a#b") != std::string::npos);  // '#' inside a word is not a comment
}

TEST_CASE("empty and unterminated input stay aligned") {
  for (auto lang : {Language::kPython, Language::kShell, Language::kNode}) {
    check_aligned("", lex_source("", lang));
    std::string bad = "x = \"unterminated\ny = '\n/* open";
    check_aligned(bad, lex_source(bad, lang));
  }
}
