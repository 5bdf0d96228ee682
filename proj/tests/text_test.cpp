#include "doctest.h"
#include "predaspect/error.hpp"
#include "predaspect/text.hpp"

using namespace predaspect;

TEST_CASE("to_lower covers ASCII, Latin-1, Greek and Cyrillic") {
  CHECK(text::to_lower("Walked") == "walked");
  CHECK(text::to_lower("ÉTÉ") == "été");
  CHECK(text::to_lower("ŁÓDŹ") == "łódź");
  CHECK(text::to_lower("ΑΒΓ") == "αβγ");
  CHECK(text::to_lower("МОСКВА") == "москва");
  CHECK(text::to_lower("日本") == "日本");
}

TEST_CASE("invalid UTF-8 is detected and replaced") {
  CHECK(text::is_valid_utf8("caf\xc3\xa9"));
  CHECK_FALSE(text::is_valid_utf8("caf\xc3"));
  CHECK_FALSE(text::is_valid_utf8("\xff"));
  CHECK(text::replace_invalid_utf8("a\xffz") == "a\xef\xbf\xbdz");
}

TEST_CASE("split and trim") {
  CHECK(text::split("a\tb\t", '\t') == std::vector<std::string>{"a", "b", ""});
  CHECK(text::split_whitespace("  a  b\tc \n") == std::vector<std::string>{"a", "b", "c"});
  CHECK(text::trim("  x y ") == "x y");
  CHECK(text::join({"a", "b"}, ",") == "a,b");
}

TEST_CASE("escape_field round-trips separators") {
  const std::string raw = "a:b;c%d\te";
  const auto esc = text::escape_field(raw);
  CHECK(esc.find(':') == std::string::npos);
  CHECK(esc.find(';') == std::string::npos);
  CHECK(text::unescape_field(esc) == raw);
  CHECK_THROWS_AS(text::unescape_field("abc%2"), FormatError);
  CHECK_THROWS_AS(text::unescape_field("%zz"), FormatError);
}
