#include "wuglab/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wuglab/error.hpp"
#include "wuglab/rng.hpp"

namespace wuglab {

namespace {

SentenceTemplate make_template(std::initializer_list<TemplateItem> items,
                               std::size_t target_slot) {
    SentenceTemplate t{std::vector<TemplateItem>(items), target_slot};
    if (t.target_slot >= t.items.size() || t.items[t.target_slot].is_literal) {
        throw std::invalid_argument("template target_slot must index a category slot");
    }
    return t;
}

using LexicalCategory::Adj;
using LexicalCategory::Adv;
using LexicalCategory::Noun;
using LexicalCategory::Verb;

TemplateItem the() { return TemplateItem::lit(kDeterminer); }
TemplateItem period() { return TemplateItem::lit(kPeriod); }

}  // namespace

const std::vector<SentenceTemplate>& grammar_templates() {
    static const std::vector<SentenceTemplate> templates = {
        make_template({the(), TemplateItem::slot(Noun), TemplateItem::slot(Verb), period()}, 1),
        make_template({the(), TemplateItem::slot(Noun), TemplateItem::slot(Verb), the(),
                       TemplateItem::slot(Noun), period()},
                      2),
        make_template({the(), TemplateItem::slot(Adj), TemplateItem::slot(Noun),
                       TemplateItem::slot(Verb), period()},
                      1),
        make_template({the(), TemplateItem::slot(Noun), TemplateItem::slot(Verb),
                       TemplateItem::slot(Adv), period()},
                      3),
        make_template({the(), TemplateItem::slot(Adj), TemplateItem::slot(Noun),
                       TemplateItem::slot(Verb), the(), TemplateItem::slot(Noun),
                       TemplateItem::slot(Adv), period()},
                      1),
    };
    return templates;
}

const SentenceTemplate& disambiguating_template(LexicalCategory c) {
    static const std::array<SentenceTemplate, kNumCategories> frames = {
        make_template({the(), TemplateItem::slot(Noun), TemplateItem::slot(Verb), period()}, 1),
        make_template({the(), TemplateItem::slot(Noun), TemplateItem::slot(Verb), the(),
                       TemplateItem::slot(Noun), period()},
                      2),
        make_template({the(), TemplateItem::slot(Adj), TemplateItem::slot(Noun),
                       TemplateItem::slot(Verb), period()},
                      1),
        make_template({the(), TemplateItem::slot(Noun), TemplateItem::slot(Verb),
                       TemplateItem::slot(Adv), period()},
                      3),
    };
    return frames[category_index(c)];
}

std::vector<std::vector<int>> generate_corpus(const Vocab& vocab, std::size_t n_sentences,
                                              std::uint64_t seed) {
    const auto& templates = grammar_templates();
    Rng rng(mix_seed(seed, 0x636f72707573ULL));  // "corpus"
    std::vector<std::vector<int>> sentences;
    sentences.reserve(n_sentences);
    for (std::size_t i = 0; i < n_sentences; ++i) {
        const auto& tpl = templates[rng.index_below(templates.size())];
        std::vector<int> sentence;
        sentence.reserve(tpl.length());
        for (const auto& item : tpl.items) {
            if (item.is_literal) {
                sentence.push_back(vocab.id_of(item.literal));
            } else {
                const auto [begin, end] = vocab.category_id_range(item.category);
                sentence.push_back(begin +
                                   static_cast<int>(rng.index_below(
                                       static_cast<std::size_t>(end - begin))));
            }
        }
        sentences.push_back(std::move(sentence));
    }
    return sentences;
}

namespace {

// Instantiates a frame: target slot becomes the mask, every other content
// slot draws a word from its category pool, distinct within the frame.
Stimulus instantiate_frame(const SentenceTemplate& tpl, const Vocab& vocab,
                           const std::array<std::vector<int>, kNumCategories>& pools,
                           int target_id, Rng& rng) {
    Stimulus s;
    s.category = tpl.items[tpl.target_slot].category;
    s.target = target_id;
    s.mask_position = tpl.target_slot;
    s.tokens.reserve(tpl.length());
    std::vector<int> used;
    for (std::size_t i = 0; i < tpl.items.size(); ++i) {
        const auto& item = tpl.items[i];
        if (item.is_literal) {
            s.tokens.push_back(vocab.id_of(item.literal));
            continue;
        }
        if (i == tpl.target_slot) {
            s.tokens.push_back(vocab.mask_id());
            continue;
        }
        std::vector<int> remaining;
        for (int id : pools[category_index(item.category)]) {
            if (std::find(used.begin(), used.end(), id) == used.end()) {
                remaining.push_back(id);
            }
        }
        if (remaining.empty()) {
            throw InsufficientLexiconError(
                "cannot instantiate frame: no unused " +
                std::string(category_name(item.category)) + " words left");
        }
        const int id = remaining[rng.index_below(remaining.size())];
        used.push_back(id);
        s.tokens.push_back(id);
    }
    return s;
}

std::array<std::vector<int>, kNumCategories> full_pools(const Vocab& vocab) {
    std::array<std::vector<int>, kNumCategories> pools;
    for (LexicalCategory c : all_categories()) {
        const auto [begin, end] = vocab.category_id_range(c);
        for (int id = begin; id < end; ++id) {
            pools[category_index(c)].push_back(id);
        }
    }
    return pools;
}

void remove_from_pools(std::array<std::vector<int>, kNumCategories>& pools,
                       const std::vector<int>& ids) {
    for (auto& pool : pools) {
        pool.erase(std::remove_if(pool.begin(), pool.end(),
                                  [&](int id) {
                                      return std::find(ids.begin(), ids.end(), id) !=
                                             ids.end();
                                  }),
                   pool.end());
    }
}

void require_registered_novel(const Vocab& vocab, int id, const char* role) {
    if (!vocab.is_registered_novel(id)) {
        throw std::invalid_argument(std::string("make stimuli: ") + role +
                                    " is not a registered novel token id");
    }
}

}  // namespace

std::vector<int> stimulus_content_words(const Stimulus& s, const Vocab& vocab) {
    std::vector<int> ids;
    for (int id : s.tokens) {
        if (vocab.is_content(id)) {
            ids.push_back(id);
        }
    }
    return ids;
}

std::pair<Stimulus, Stimulus> make_training_stimuli(CategoryPair pair, const Vocab& vocab,
                                                    int novel_a, int novel_b,
                                                    std::uint64_t seed) {
    require_registered_novel(vocab, novel_a, "novel_a");
    require_registered_novel(vocab, novel_b, "novel_b");
    Rng rng(mix_seed(seed, 0x747261696eULL));  // "train"
    auto pools = full_pools(vocab);
    Stimulus a = instantiate_frame(disambiguating_template(pair.first), vocab, pools,
                                   novel_a, rng);
    remove_from_pools(pools, stimulus_content_words(a, vocab));
    Stimulus b = instantiate_frame(disambiguating_template(pair.second), vocab, pools,
                                   novel_b, rng);
    return {std::move(a), std::move(b)};
}

TestSet make_test_set(CategoryPair pair, const Vocab& vocab, std::size_t n_per_category,
                      const std::pair<Stimulus, Stimulus>& train_stimuli, int novel_a,
                      int novel_b, std::uint64_t seed) {
    require_registered_novel(vocab, novel_a, "novel_a");
    require_registered_novel(vocab, novel_b, "novel_b");
    Rng rng(mix_seed(seed, 0x74657374ULL));  // "test"

    auto pools = full_pools(vocab);
    std::vector<int> train_words = stimulus_content_words(train_stimuli.first, vocab);
    for (int id : stimulus_content_words(train_stimuli.second, vocab)) {
        train_words.push_back(id);
    }
    remove_from_pools(pools, train_words);

    TestSet set{pair, {}, n_per_category};
    set.items.reserve(2 * n_per_category);
    const std::array<std::pair<LexicalCategory, int>, 2> sides = {
        std::pair{pair.first, novel_a}, std::pair{pair.second, novel_b}};
    for (const auto& [category, novel_id] : sides) {
        const auto& tpl = disambiguating_template(category);
        for (std::size_t i = 0; i < n_per_category; ++i) {
            set.items.push_back(instantiate_frame(tpl, vocab, pools, novel_id, rng));
        }
    }
    return set;
}

std::vector<Stimulus> make_heldout_stimuli(const Vocab& vocab, std::size_t n,
                                           std::uint64_t seed) {
    const auto& templates = grammar_templates();
    Rng rng(mix_seed(seed, 0x68656c64ULL));  // "held"
    std::vector<Stimulus> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tpl = templates[rng.index_below(templates.size())];
        Stimulus s;
        s.tokens.reserve(tpl.length());
        std::vector<std::size_t> content_positions;
        for (std::size_t p = 0; p < tpl.items.size(); ++p) {
            const auto& item = tpl.items[p];
            if (item.is_literal) {
                s.tokens.push_back(vocab.id_of(item.literal));
            } else {
                content_positions.push_back(p);
                const auto [begin, end] = vocab.category_id_range(item.category);
                s.tokens.push_back(begin +
                                   static_cast<int>(rng.index_below(
                                       static_cast<std::size_t>(end - begin))));
            }
        }
        s.mask_position = content_positions[rng.index_below(content_positions.size())];
        s.target = s.tokens[s.mask_position];
        s.category = tpl.items[s.mask_position].category;
        s.tokens[s.mask_position] = vocab.mask_id();
        items.push_back(std::move(s));
    }
    return items;
}

std::string stimulus_to_line(const Stimulus& s, const Vocab& vocab) {
    std::ostringstream out;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (i > 0) {
            out << ' ';
        }
        out << vocab.token(s.tokens[i]);
    }
    out << '\t' << s.mask_position << ' ' << vocab.token(s.target) << ' '
        << category_name(s.category);
    return out.str();
}

Stimulus stimulus_from_line(const std::string& line, const Vocab& vocab) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
        throw CorruptFileError("stimulus line missing tab separator: " + line);
    }
    Stimulus s;
    std::istringstream tokens(line.substr(0, tab));
    std::string word;
    while (tokens >> word) {
        const auto id = vocab.try_id_of(word);
        if (!id) {
            throw CorruptFileError("stimulus line has unknown token: " + word);
        }
        s.tokens.push_back(*id);
    }
    std::istringstream meta(line.substr(tab + 1));
    std::string target_word, category;
    if (!(meta >> s.mask_position >> target_word >> category)) {
        throw CorruptFileError("stimulus line has malformed metadata: " + line);
    }
    const auto target = vocab.try_id_of(target_word);
    if (!target) {
        throw CorruptFileError("stimulus line has unknown target: " + target_word);
    }
    s.target = *target;
    s.category = category_from_name(category);
    if (s.mask_position >= s.tokens.size() ||
        s.tokens[s.mask_position] != vocab.mask_id()) {
        throw CorruptFileError("stimulus mask_position does not point at the mask: " + line);
    }
    return s;
}

void write_stimuli(std::ostream& out, const std::vector<Stimulus>& items,
                   const Vocab& vocab) {
    for (const auto& s : items) {
        out << stimulus_to_line(s, vocab) << '\n';
    }
}

std::vector<Stimulus> read_stimuli(std::istream& in, const Vocab& vocab) {
    std::vector<Stimulus> items;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            items.push_back(stimulus_from_line(line, vocab));
        }
    }
    return items;
}

void write_sentences(std::ostream& out, const std::vector<std::vector<int>>& sentences,
                     const Vocab& vocab) {
    for (const auto& sentence : sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i > 0) {
                out << ' ';
            }
            out << vocab.token(sentence[i]);
        }
        out << '\n';
    }
}

std::vector<std::vector<int>> read_sentences(std::istream& in, const Vocab& vocab) {
    std::vector<std::vector<int>> sentences;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream words(line);
        std::vector<int> sentence;
        std::string word;
        while (words >> word) {
            const auto id = vocab.try_id_of(word);
            if (!id) {
                throw CorruptFileError("corpus line has unknown token: " + word);
            }
            sentence.push_back(*id);
        }
        sentences.push_back(std::move(sentence));
    }
    return sentences;
}

}  // namespace wuglab
