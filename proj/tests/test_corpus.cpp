#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "graphhop/corpus.hpp"

#include "helpers.hpp"

using namespace graphhop;

TEST_CASE("load_corpus reads documents in file order") {
    testutil::TempDir dir("corpus-load");
    testutil::write_file(dir.file("c.jsonl"),
                         R"({"doc_id":"d1","title":"One","text":"alpha beta"})"
                         "\n"
                         R"({"doc_id":"d2","title":"Two","text":"gamma"})"
                         "\n");
    auto docs = load_corpus(dir.file("c.jsonl"));
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "d1");
    CHECK(docs[0].title == "One");
    CHECK(docs[1].doc_id == "d2");
}

TEST_CASE("load_corpus rejects duplicate doc ids") {
    testutil::TempDir dir("corpus-dup");
    testutil::write_file(dir.file("c.jsonl"),
                         R"({"doc_id":"d1","title":"a","text":"x"})"
                         "\n"
                         R"({"doc_id":"d1","title":"b","text":"y"})"
                         "\n");
    CHECK_THROWS_WITH(load_corpus(dir.file("c.jsonl")),
                      Catch::Matchers::ContainsSubstring("d1"));
}

TEST_CASE("load_corpus on an empty file yields an empty list") {
    testutil::TempDir dir("corpus-empty");
    testutil::write_file(dir.file("c.jsonl"), "");
    CHECK(load_corpus(dir.file("c.jsonl")).empty());
}

TEST_CASE("load_corpus names the offending line on parse errors") {
    testutil::TempDir dir("corpus-bad");
    testutil::write_file(dir.file("c.jsonl"),
                         R"({"doc_id":"d1","title":"a","text":"x"})"
                         "\n{not json\n");
    CHECK_THROWS_WITH(load_corpus(dir.file("c.jsonl")),
                      Catch::Matchers::ContainsSubstring("2"));
}

TEST_CASE("load_corpus rejects whitespace-only text") {
    testutil::TempDir dir("corpus-blank");
    testutil::write_file(dir.file("c.jsonl"), R"({"doc_id":"d1","title":"a","text":"  \n "})"
                                              "\n");
    CHECK_THROWS_AS(load_corpus(dir.file("c.jsonl")), ValidationError);
}

TEST_CASE("one under-budget paragraph stays a single chunk") {
    auto doc = testutil::numbered_doc("d", {100});
    auto chunks = chunk_document(doc);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].word_count == 100);
    CHECK(chunks[0].chunk_id == "d#c00000");
    CHECK(chunks[0].text == doc.text);
}

TEST_CASE("an oversized paragraph splits into overlapping word windows") {
    // Hand-derived windows for 500 words at budget 240 / overlap 40:
    // [0, 240), [200, 440), [400, 500).
    auto doc = testutil::numbered_doc("d", {500});
    auto chunks = chunk_document(doc);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].word_count == 240);
    CHECK(chunks[1].word_count == 240);
    CHECK(chunks[2].word_count == 100);

    auto words = word_spans(doc.text);
    auto window_text = [&](std::size_t from, std::size_t to) {
        return doc.text.substr(words[from].first, words[to - 1].second - words[from].first);
    };
    CHECK(chunks[0].text == window_text(0, 240));
    CHECK(chunks[1].text == window_text(200, 440));
    CHECK(chunks[2].text == window_text(400, 500));
}

TEST_CASE("packing two paragraphs over the budget splits at the boundary") {
    auto doc = testutil::numbered_doc("d", {150, 150});
    auto chunks = chunk_document(doc);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].word_count == 150);
    CHECK(chunks[1].word_count == 150);
}

TEST_CASE("paragraphs pack greedily while under the budget") {
    auto doc = testutil::numbered_doc("d", {100, 100, 100});
    auto chunks = chunk_document(doc);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].word_count == 200);
    CHECK(chunks[1].word_count == 100);
}

TEST_CASE("whitespace-only document yields no chunks") {
    Document doc{"d", "t", "  \n\n  "};
    CHECK(chunk_document(doc).empty());
}

TEST_CASE("chunking validates its parameters") {
    Document doc{"d", "t", "a b c"};
    CHECK_THROWS_AS(chunk_document(doc, 40, 40), ValidationError);
    CHECK_THROWS_AS(chunk_document(doc, 40, -1), ValidationError);
}

TEST_CASE("chunk offsets reproduce the document slice") {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        auto doc = testutil::random_doc(rng, "d" + std::to_string(trial));
        for (const auto& c : chunk_document(doc)) {
            CHECK(c.end_char > c.start_char);
            CHECK(doc.text.substr(c.start_char, c.end_char - c.start_char) == c.text);
            CHECK(c.word_count <= 240);
        }
    }
}

TEST_CASE("every document word lands in at least one chunk") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        auto doc = testutil::random_doc(rng, "d" + std::to_string(trial));
        auto chunks = chunk_document(doc);
        for (auto [ws, we] : word_spans(doc.text)) {
            bool covered = false;
            for (const auto& c : chunks)
                covered = covered || (ws >= c.start_char && we <= c.end_char);
            CHECK(covered);
        }
    }
}

TEST_CASE("window runs share exactly the overlap word count") {
    SplitMix64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        int words = 241 + static_cast<int>(rng.next_below(800));
        auto doc = testutil::numbered_doc("d", {words});
        auto chunks = chunk_document(doc);
        REQUIRE(chunks.size() >= 2);
        for (std::size_t i = 1; i < chunks.size(); ++i) {
            // Shared words = words in both chunks; chunks are contiguous
            // word ranges, so count words inside the offset intersection.
            int shared = 0;
            for (auto [ws, we] : word_spans(doc.text))
                if (ws >= chunks[i].start_char && we <= chunks[i - 1].end_char) ++shared;
            CHECK(shared == std::min(40, chunks[i - 1].word_count));
        }
    }
}

TEST_CASE("chunking is a pure function of its input") {
    SplitMix64 rng(44);
    auto doc = testutil::random_doc(rng, "d");
    auto a = chunk_document(doc);
    auto b = chunk_document(doc);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].chunk_id == b[i].chunk_id);
        CHECK(a[i].text == b[i].text);
        CHECK(a[i].start_char == b[i].start_char);
        CHECK(a[i].end_char == b[i].end_char);
        CHECK(a[i].seq == static_cast<int>(i));
    }
}
