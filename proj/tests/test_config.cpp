#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "semrank/config.hpp"
#include "semrank/errors.hpp"

using namespace semrank;

TEST_CASE("parses sectioned key=value text") {
  auto config = KeyValueConfig::parse_string(
      "# experiment defaults\n"
      "bm25.k1 = 1.2\n"
      "rerank.lambda=0.35\n"
      "paths.index = /tmp/idx  # trailing comment\n"
      "\n"
      "threads=4\n");
  CHECK(config.get_double("bm25.k1") == 1.2);
  CHECK(config.get_double("rerank.lambda") == 0.35);
  CHECK(config.get("paths.index") == "/tmp/idx");
  CHECK(config.get_int("threads") == 4);
  CHECK_FALSE(config.get("missing").has_value());
}

TEST_CASE("malformed lines are errors") {
  CHECK_THROWS_AS(KeyValueConfig::parse_string("just words\n"), DataError);
  CHECK_THROWS_AS(KeyValueConfig::parse_string("=value\n"), DataError);
}

TEST_CASE("typed getters validate") {
  auto config = KeyValueConfig::parse_string("a=xyz\n");
  CHECK_THROWS_AS(config.get_double("a"), DataError);
  CHECK_THROWS_AS(config.get_int("a"), DataError);
}
