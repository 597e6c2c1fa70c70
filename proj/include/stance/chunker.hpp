#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stance {

struct Sentence {
    std::string text;  // trimmed, non-empty
    int index = 0;     // position in document
};

struct Chunk {
    std::string text;
    int token_len = 0;        // whitespace token count of text
    int first_sentence = 0;   // inclusive sentence span; [0,-1] when the
    int last_sentence = -1;   // chunk is not sentence-aligned (truncation)
    int chunk_index = 0;
    bool is_fragment = false;  // hard-split piece of an oversized sentence
};

struct ChunkingConfig {
    int max_tokens = 512;
    int overlap_sentences = 1;
    bool enabled = true;
};

// Rule-based segmentation: splits after '.', '!' or '?' runs followed by
// whitespace and an uppercase letter or digit (or end of text). A fixed
// abbreviation list ("Dr.", "e.g.", "U.S.", ...) suppresses splits. Text
// without a terminator is a single sentence.
std::vector<Sentence> segment_sentences(std::string_view text);

// The abbreviation fixture, lowercased, for documentation and tests.
const std::vector<std::string>& sentence_abbreviations();

// Greedy sentence packing up to max_tokens; each new chunk re-seeds with the
// last overlap_sentences sentences of the previous one (dropped from the
// front when they would leave no room for new content). A single sentence
// longer than max_tokens is hard-split at token boundaries into flagged
// fragments. enabled=false truncates to the first max_tokens tokens instead.
std::vector<Chunk> chunk_document(std::string_view text,
                                  const ChunkingConfig& config);

// Prefix of text covering its first max_tokens whitespace tokens.
std::string truncate_tokens(std::string_view text, int max_tokens);

}  // namespace stance
