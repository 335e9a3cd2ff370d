#include <doctest.h>

#include "routedet/common.hpp"
#include "routedet/vocab.hpp"

using namespace routedet;

TEST_SUITE("vocab") {

TEST_CASE("alphabet sizes and ordering") {
    auto full = char_alphabet();
    CHECK(full.size() == 28);
    CHECK(full.token(0) == "a");
    CHECK(full.token(25) == "z");
    CHECK(full.token(26) == " ");
    CHECK(full.token(27) == "<unk>");

    auto small = char_alphabet_prefix(4);
    CHECK(small.size() == 4);
    CHECK(small.token(3) == "d");
}

TEST_CASE("duplicate tokens rejected") {
    CHECK_THROWS_AS(Vocabulary({"a", "b", "a"}), Error);
    CHECK_THROWS_AS(Vocabulary({"a"}), Error);
}

TEST_CASE("tokenize lowercases and maps unknowns to unk") {
    auto vocab = char_alphabet();
    auto seq = tokenize_text(vocab, "Ab!z", Label::human, "src");
    REQUIRE(seq.ids.size() == 4);
    CHECK(seq.ids[0] == 0);
    CHECK(seq.ids[1] == 1);
    CHECK(seq.ids[2] == 27);  // '!' -> <unk>
    CHECK(seq.ids[3] == 25);
    CHECK(seq.label == Label::human);
    CHECK(seq.source_id == "src");
}

TEST_CASE("tokenize without unk token errors on unknown characters") {
    auto vocab = char_alphabet_prefix(4);
    CHECK_THROWS_AS(tokenize_text(vocab, "az", Label::machine), Error);
    auto ok = tokenize_text(vocab, "abba", Label::machine);
    CHECK(ok.ids == std::vector<std::int32_t>{0, 1, 1, 0});
}

TEST_CASE("render round trip") {
    auto vocab = char_alphabet_prefix(6);
    auto seq = tokenize_text(vocab, "fade", Label::machine);
    CHECK(render_text(vocab, seq) == "fade");
}

}  // TEST_SUITE
