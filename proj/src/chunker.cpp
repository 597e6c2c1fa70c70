#include "stance/chunker.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

#include "stance/corpus.hpp"
#include "stance/util.hpp"

namespace stance {

namespace {

inline bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_abbreviation(std::string_view text, std::size_t period) {
    // Word = maximal non-whitespace run ending at the period, with leading
    // punctuation (quotes, brackets) peeled off.
    std::size_t start = period;
    while (start > 0 && !is_space(text[start - 1])) --start;
    while (start < period &&
           !std::isalnum(static_cast<unsigned char>(text[start])))
        ++start;
    std::string word = to_lower(std::string(text.substr(start, period - start + 1)));
    const auto& abbrevs = sentence_abbreviations();
    return std::find(abbrevs.begin(), abbrevs.end(), word) != abbrevs.end();
}

}  // namespace

const std::vector<std::string>& sentence_abbreviations() {
    static const std::vector<std::string> kAbbrevs = {
        "mr.",  "mrs.", "ms.",  "dr.",  "prof.", "sr.",  "jr.",
        "st.",  "vs.",  "etc.", "e.g.", "i.e.",  "u.s.", "u.k.",
        "no.",  "fig.", "al.",  "inc.", "co.",   "est."};
    return kAbbrevs;
}

std::vector<Sentence> segment_sentences(std::string_view text) {
    std::vector<Sentence> sentences;
    auto emit = [&](std::size_t begin, std::size_t end) {
        std::string_view piece = trim(text.substr(begin, end - begin));
        if (!piece.empty())
            sentences.push_back(
                {std::string(piece), static_cast<int>(sentences.size())});
    };

    std::size_t start = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t run_end = i;  // last terminator of the run
        while (run_end + 1 < n && is_terminator(text[run_end + 1])) ++run_end;

        bool boundary = false;
        std::size_t next = run_end + 1;
        if (next >= n) {
            boundary = true;
        } else if (is_space(text[next])) {
            std::size_t k = next;
            while (k < n && is_space(text[k])) ++k;
            if (k == n)
                boundary = true;
            else {
                unsigned char c = static_cast<unsigned char>(text[k]);
                boundary = std::isupper(c) || std::isdigit(c);
            }
            next = k;
        }
        // A lone period that closes a listed abbreviation never splits.
        if (boundary && run_end == i && text[i] == '.' && is_abbreviation(text, i))
            boundary = false;

        if (boundary) {
            emit(start, run_end + 1);
            start = next;
            i = next;
        } else {
            i = run_end + 1;
        }
    }
    if (start < n) emit(start, n);
    return sentences;
}

std::string truncate_tokens(std::string_view text, int max_tokens) {
    if (max_tokens <= 0) return std::string();
    int seen = 0;
    bool in_token = false;
    std::size_t end = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool sp = is_space(text[i]);
        if (!sp && !in_token) {
            if (seen == max_tokens) break;
            ++seen;
        }
        if (!sp) end = i + 1;
        in_token = !sp;
        if (sp && seen == max_tokens) break;
    }
    return std::string(trim(text.substr(0, end)));
}

namespace {

// Splits an oversized sentence at token boundaries into flagged fragments.
void emit_fragments(const Sentence& sentence, int max_tokens,
                    std::vector<Chunk>& chunks) {
    auto tokens = whitespace_tokens(sentence.text);
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        std::size_t take =
            std::min<std::size_t>(static_cast<std::size_t>(max_tokens),
                                  tokens.size() - pos);
        std::string piece;
        for (std::size_t t = 0; t < take; ++t) {
            if (t) piece += ' ';
            piece += tokens[pos + t];
        }
        Chunk chunk;
        chunk.text = std::move(piece);
        chunk.token_len = static_cast<int>(take);
        chunk.first_sentence = sentence.index;
        chunk.last_sentence = sentence.index;
        chunk.chunk_index = static_cast<int>(chunks.size());
        chunk.is_fragment = true;
        chunks.push_back(std::move(chunk));
        pos += take;
    }
}

}  // namespace

std::vector<Chunk> chunk_document(std::string_view text,
                                  const ChunkingConfig& config) {
    if (config.max_tokens <= 0)
        throw std::invalid_argument("max_tokens must be positive");
    if (config.overlap_sentences < 0)
        throw std::invalid_argument("overlap_sentences must be non-negative");

    if (!config.enabled) {
        std::string truncated = truncate_tokens(text, config.max_tokens);
        if (truncated.empty()) return {};
        Chunk chunk;
        chunk.token_len = token_count(truncated);
        chunk.text = std::move(truncated);
        chunk.first_sentence = 0;
        chunk.last_sentence = -1;  // not sentence-aligned
        chunk.chunk_index = 0;
        return {std::move(chunk)};
    }

    auto sentences = segment_sentences(text);
    if (sentences.empty()) return {};

    std::vector<int> token_lens(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i)
        token_lens[i] = token_count(sentences[i].text);

    std::vector<Chunk> chunks;
    std::vector<std::size_t> current;  // sentence indices of the open chunk
    int current_tokens = 0;
    std::size_t fresh_from = 0;  // sentences in current before this index are overlap

    auto flush = [&]() {
        if (current.empty()) return;
        std::string body;
        for (std::size_t k = 0; k < current.size(); ++k) {
            if (k) body += ' ';
            body += sentences[current[k]].text;
        }
        Chunk chunk;
        chunk.text = std::move(body);
        chunk.token_len = current_tokens;
        chunk.first_sentence = sentences[current.front()].index;
        chunk.last_sentence = sentences[current.back()].index;
        chunk.chunk_index = static_cast<int>(chunks.size());
        chunks.push_back(std::move(chunk));
    };

    for (std::size_t s = 0; s < sentences.size(); ++s) {
        const int len = token_lens[s];
        if (len > config.max_tokens) {
            flush();
            current.clear();
            current_tokens = 0;
            fresh_from = 0;
            emit_fragments(sentences[s], config.max_tokens, chunks);
            continue;  // no overlap across a hard split
        }
        if (current_tokens + len > config.max_tokens && !current.empty()) {
            flush();
            // Re-seed with the tail of the finished chunk; drop overlap
            // sentences from the front while they would crowd out s.
            std::size_t take = std::min<std::size_t>(
                static_cast<std::size_t>(config.overlap_sentences),
                current.size());
            std::vector<std::size_t> tail(current.end() - static_cast<std::ptrdiff_t>(take),
                                          current.end());
            int tail_tokens = 0;
            for (std::size_t idx : tail) tail_tokens += token_lens[idx];
            std::size_t drop = 0;
            while (drop < tail.size() &&
                   tail_tokens + len > config.max_tokens) {
                tail_tokens -= token_lens[tail[drop]];
                ++drop;
            }
            current.assign(tail.begin() + static_cast<std::ptrdiff_t>(drop), tail.end());
            current_tokens = tail_tokens;
            fresh_from = current.size();
        }
        current.push_back(s);
        current_tokens += len;
    }
    if (current.size() > fresh_from) flush();
    return chunks;
}

}  // namespace stance
