#include "doctest.h"

#include "mevsim/amount.hpp"

using namespace mevsim;
using namespace mevsim::literals;

TEST_CASE("parse and format round trip on six fractional digits") {
  CHECK(TokenAmount::parse("90.909090").millionths() == 90'909'090);
  CHECK(TokenAmount::parse("100").millionths() == 100'000'000);
  CHECK(TokenAmount::parse("0.5").millionths() == 500'000);
  CHECK(TokenAmount::parse(".000001").millionths() == 1);
  CHECK(TokenAmount::from_millionths(18'032'785).str() == "18.032785");
  CHECK(TokenAmount{}.str() == "0.000000");
  CHECK(SignedAmount::from_millionths(-1).str() == "-0.000001");
  CHECK(SignedAmount::parse("-15.151515").millionths() == -15'151'515);
}

TEST_CASE("malformed amounts are rejected") {
  CHECK_THROWS_AS(TokenAmount::parse(""), SimError);
  CHECK_THROWS_AS(TokenAmount::parse("1.0000001"), SimError);
  CHECK_THROWS_AS(TokenAmount::parse("-1"), SimError);
  CHECK_THROWS_AS(TokenAmount::parse("1e3"), SimError);
  CHECK_THROWS_AS(TokenAmount::parse("."), SimError);
}

TEST_CASE("arithmetic floors and never goes negative") {
  CHECK((1_tok - 1_micro).str() == "0.999999");
  CHECK_THROWS_AS(1_micro - 2_micro, SimError);
  CHECK((1_micro).saturating_sub(2_micro).is_zero());
  CHECK(TokenAmount::from_millionths(10).scaled(1, 3).millionths() == 3);
  CHECK(TokenAmount::units(10).fraction(0.9) == 9_tok);
  CHECK(TokenAmount::from_millionths(7).fraction(0.5).millionths() == 3);
  CHECK(TokenAmount::parse("0.01").times(100) == 1_tok);
  CHECK_THROWS_AS(1_tok .fraction(1.5), SimError);
}
