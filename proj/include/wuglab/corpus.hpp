#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wuglab/category.hpp"
#include "wuglab/lexicon.hpp"

namespace wuglab {

// One slot of a sentence template: either a literal function word or a
// category-constrained content slot.
struct TemplateItem {
    bool is_literal;
    std::string literal;      // valid when is_literal
    LexicalCategory category; // valid when !is_literal

    static TemplateItem lit(std::string word) {
        return {true, std::move(word), LexicalCategory::Noun};
    }
    static TemplateItem slot(LexicalCategory c) { return {false, {}, c}; }
};

struct SentenceTemplate {
    std::vector<TemplateItem> items;
    std::size_t target_slot;  // index of the category slot under study

    std::size_t length() const { return items.size(); }
};

// The five grammar templates:
//   the N V .
//   the N V the N .
//   the ADJ N V .
//   the N V ADV .
//   the ADJ N V the N ADV .
// Each category has at least one slot licensed by no other category.
const std::vector<SentenceTemplate>& grammar_templates();

// Per-category disambiguating frame (mask at target_slot licenses exactly
// that category):
//   NOUN: the _ V .      VERB: the N _ the N .
//   ADJ:  the _ N V .    ADV:  the N V _ .
const SentenceTemplate& disambiguating_template(LexicalCategory c);

// A fill-in-the-blank item: token ids with exactly one mask.
struct Stimulus {
    std::vector<int> tokens;
    std::size_t mask_position;
    int target;
    LexicalCategory category;
};

struct TestSet {
    CategoryPair pair;
    std::vector<Stimulus> items;  // first-category items, then second-category
    std::size_t n_per_category;
};

// Base-training sentences: each instantiates one grammar template, words
// uniform per slot, template choice uniform. Deterministic per seed.
std::vector<std::vector<int>> generate_corpus(const Vocab& vocab, std::size_t n_sentences,
                                              std::uint64_t seed);

// The single disambiguating exposure pair: one stimulus per category of the
// pair, frames sharing no content words, targets the two novel-token ids.
std::pair<Stimulus, Stimulus> make_training_stimuli(CategoryPair pair, const Vocab& vocab,
                                                    int novel_a, int novel_b,
                                                    std::uint64_t seed);

// n_per_category fresh frames per category whose content words are disjoint
// from the training frames. Targets are the pair's novel-token ids
// (novel_a = first category, novel_b = second). Throws
// InsufficientLexiconError when disjointness cannot be met.
TestSet make_test_set(CategoryPair pair, const Vocab& vocab, std::size_t n_per_category,
                      const std::pair<Stimulus, Stimulus>& train_stimuli, int novel_a,
                      int novel_b, std::uint64_t seed);

// Single-mask evaluation stimuli drawn from the base grammar: one random
// content position of a random sentence is masked; target is the original
// word, category is the word's own.
std::vector<Stimulus> make_heldout_stimuli(const Vocab& vocab, std::size_t n,
                                           std::uint64_t seed);

// Content-word token ids of a stimulus, mask and target excluded.
std::vector<int> stimulus_content_words(const Stimulus& s, const Vocab& vocab);

// --- text round trip ------------------------------------------------------
// One stimulus per line: space-separated tokens, a tab, then
// "mask_position target category".
std::string stimulus_to_line(const Stimulus& s, const Vocab& vocab);
Stimulus stimulus_from_line(const std::string& line, const Vocab& vocab);

void write_stimuli(std::ostream& out, const std::vector<Stimulus>& items, const Vocab& vocab);
std::vector<Stimulus> read_stimuli(std::istream& in, const Vocab& vocab);

void write_sentences(std::ostream& out, const std::vector<std::vector<int>>& sentences,
                     const Vocab& vocab);
std::vector<std::vector<int>> read_sentences(std::istream& in, const Vocab& vocab);

}  // namespace wuglab
