// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/corpus.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "projcomp/rng.hpp"

namespace projcomp {

namespace {

struct Noun {
    const char* one;
    const char* many;
};

struct Verb {
    const char* one;  // third person singular
    const char* many;
};

constexpr std::array<Noun, 24> kNouns{{
    {"river", "rivers"},   {"farmer", "farmers"}, {"king", "kings"},       {"bird", "birds"},
    {"child", "children"}, {"ship", "ships"},     {"town", "towns"},       {"wolf", "wolves"},
    {"lamp", "lamps"},     {"garden", "gardens"}, {"soldier", "soldiers"}, {"horse", "horses"},
    {"letter", "letters"}, {"mountain", "mountains"}, {"sailor", "sailors"}, {"window", "windows"},
    {"stone", "stones"},   {"teacher", "teachers"}, {"road", "roads"},     {"tree", "trees"},
    {"queen", "queens"},   {"door", "doors"},     {"merchant", "merchants"}, {"song", "songs"},
}};

constexpr std::array<Verb, 16> kTransitive{{
    {"sees", "see"},     {"follows", "follow"}, {"carries", "carry"}, {"finds", "find"},
    {"watches", "watch"}, {"builds", "build"},  {"remembers", "remember"}, {"keeps", "keep"},
    {"loves", "love"},   {"crosses", "cross"},  {"calls", "call"},    {"hides", "hide"},
    {"opens", "open"},   {"guards", "guard"},   {"paints", "paint"},  {"leaves", "leave"},
}};

constexpr std::array<Verb, 10> kIntransitive{{
    {"sleeps", "sleep"}, {"waits", "wait"},   {"sings", "sing"},   {"falls", "fall"},
    {"rests", "rest"},   {"wanders", "wander"}, {"listens", "listen"}, {"laughs", "laugh"},
    {"shines", "shine"}, {"returns", "return"},
}};

constexpr std::array<const char*, 14> kAdjectives{{
    "old", "quiet", "small", "bright", "cold", "green", "tired", "brave",
    "distant", "golden", "heavy", "gentle", "dark", "young",
}};

constexpr std::array<const char*, 8> kPrepositions{{
    "near", "under", "beside", "behind", "across", "through", "above", "toward",
}};

constexpr std::array<const char*, 7> kAdverbs{{
    "slowly", "often", "again", "at night", "in the morning", "without a word", "every day",
}};

// Zipf-like: index i drawn with weight 1/(i+1).
std::size_t zipf(Rng& rng, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 1);
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < n; ++i) {
        u -= 1.0 / static_cast<double>(i + 1);
        if (u < 0.0) return i;
    }
    return n - 1;
}

class Writer {
public:
    explicit Writer(std::uint64_t seed) : rng_(seed) {}

    std::string noun_phrase(bool& plural) {
        plural = rng_.uniform() < 0.3;
        std::string s = plural ? (rng_.uniform() < 0.5 ? "the " : "some ") : (rng_.uniform() < 0.7 ? "the " : "a ");
        if (rng_.uniform() < 0.45) {
            s += kAdjectives[zipf(rng_, kAdjectives.size())];
            s += ' ';
        }
        const Noun& n = kNouns[zipf(rng_, kNouns.size())];
        s += plural ? n.many : n.one;
        if (s.rfind("a ", 0) == 0 && std::string_view("aeiou").find(s[2]) != std::string_view::npos) {
            s.insert(1, "n");
        }
        if (rng_.uniform() < 0.15) {
            bool inner = false;
            s += ' ';
            s += kPrepositions[zipf(rng_, kPrepositions.size())];
            s += ' ';
            s += simple_np(inner);
        }
        return s;
    }

    std::string simple_np(bool& plural) {
        plural = rng_.uniform() < 0.3;
        const Noun& n = kNouns[zipf(rng_, kNouns.size())];
        return std::string("the ") + (plural ? n.many : n.one);
    }

    std::string clause() {
        bool plural = false;
        std::string s = noun_phrase(plural);
        if (rng_.uniform() < 0.6) {
            const Verb& v = kTransitive[zipf(rng_, kTransitive.size())];
            bool obj_plural = false;
            s += ' ';
            s += plural ? v.many : v.one;
            s += ' ';
            s += noun_phrase(obj_plural);
        } else {
            const Verb& v = kIntransitive[zipf(rng_, kIntransitive.size())];
            s += ' ';
            s += plural ? v.many : v.one;
        }
        if (rng_.uniform() < 0.3) {
            s += ' ';
            s += kAdverbs[zipf(rng_, kAdverbs.size())];
        }
        return s;
    }

    std::string sentence() {
        std::string s = clause();
        const double r = rng_.uniform();
        if (r < 0.2) {
            s += " and " + clause();
        } else if (r < 0.3) {
            s += " because " + clause();
        } else if (r < 0.38) {
            s += ", but " + clause();
        }
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
        s += rng_.uniform() < 0.9 ? ". " : "! ";
        return s;
    }

    bool paragraph_break() { return rng_.uniform() < 0.12; }

private:
    Rng rng_;
};

}  // namespace

std::string synthetic_corpus(std::size_t bytes, std::uint64_t seed) {
    Writer w(seed);
    std::string out;
    out.reserve(bytes + 256);
    while (out.size() < bytes) {
        out += w.sentence();
        if (w.paragraph_break()) {
            out.back() = '\n';
            out += '\n';
        }
    }
    out.resize(bytes);
    return out;
}

}  // namespace projcomp
