#pragma once

// Level-indexed map collections, words, compositions and Bowen metrics.
//
// A schedule is a finite prefix of levels followed by a periodic tail: for
// j beyond the prefix, level(j) = level(j - p). A constant schedule is the
// case p = 1. Levels are numbered from 1, symbols from 0.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "naifs/errors.hpp"
#include "naifs/map_zoo.hpp"
#include "naifs/random.hpp"
#include "naifs/spaces.hpp"

namespace naifs {

using BigInt = boost::multiprecision::cpp_int;
using Level = std::vector<MapRef>;

enum class TailKind { constant, periodic };

class NaifsSchedule {
public:
    /// The same level at every j.
    static NaifsSchedule constant(Level level) {
        const Space s = first_space({level});
        return NaifsSchedule(s, {std::move(level)}, 1, TailKind::constant);
    }

    /// `prefix` followed by repetitions of its last `period` levels.
    static NaifsSchedule periodic(std::vector<Level> prefix, std::size_t period) {
        if (period < 1 || period > prefix.size())
            throw InputError("schedule: period must be between 1 and the number of listed levels");
        const Space s = first_space(prefix);
        return NaifsSchedule(s, std::move(prefix), period, period == 1 ? TailKind::constant : TailKind::periodic);
    }

    /// `prefix` followed by its last level forever.
    static NaifsSchedule constant_tail(std::vector<Level> prefix) {
        const Space s = first_space(prefix);
        return NaifsSchedule(s, std::move(prefix), 1, TailKind::constant);
    }

    const Space& space() const { return space_; }
    std::size_t prefix_length() const { return levels_.size(); }
    std::size_t period() const { return period_; }
    TailKind tail() const { return tail_; }
    const std::vector<Level>& prefix() const { return levels_; }

    /// Zero-based position in `prefix()` that represents level j.
    std::size_t slot(std::size_t j) const {
        if (j < 1) throw InputError("schedule levels are numbered from 1");
        const std::size_t len = levels_.size();
        if (j <= len) return j - 1;
        return len - period_ + (j - len - 1) % period_;
    }

    const Level& level(std::size_t j) const { return levels_[slot(j)]; }
    std::size_t level_size(std::size_t j) const { return level(j).size(); }
    const Map& map(std::size_t j, std::size_t symbol) const {
        const auto& lv = level(j);
        if (symbol >= lv.size())
            throw InputError("symbol " + std::to_string(symbol) + " out of range for level " + std::to_string(j));
        return *lv[symbol];
    }

    /// #(I^{m,n}) = prod_{j<n} #(I^{(m+j)}), exact.
    BigInt word_count(std::size_t m, std::size_t n) const {
        BigInt total = 1;
        for (std::size_t j = 0; j < n; ++j) total *= level_size(m + j);
        return total;
    }

    template <class Pred>
    bool all_maps(Pred pred) const {
        for (const auto& lv : levels_)
            for (const auto& f : lv)
                if (!pred(f->info())) return false;
        return true;
    }

    bool uniformly_expanding() const {
        return all_maps([](const MapInfo& i) { return i.expanding && i.has_branches; });
    }
    bool all_monotone() const {
        return all_maps([](const MapInfo& i) { return i.monotone; });
    }
    bool all_isometries() const {
        return all_maps([](const MapInfo& i) { return i.isometry; });
    }

    /// Common expansion factor: the minimum over all generators.
    double sigma_min() const { return fold([](const MapInfo& i) { return i.sigma; }, true); }
    /// Common injectivity constant: the minimum over all generators.
    double rho_min() const { return fold([](const MapInfo& i) { return i.rho; }, true); }
    double max_lipschitz() const { return fold([](const MapInfo& i) { return i.lipschitz; }, false); }

    /// Canonical text form; identical schedules give identical strings.
    std::string describe() const {
        std::ostringstream os;
        os << space_.name() << ";period=" << period_ << ";tail=" << (tail_ == TailKind::constant ? "constant" : "periodic");
        for (std::size_t j = 0; j < levels_.size(); ++j) {
            os << ";L" << (j + 1) << "=[";
            for (std::size_t i = 0; i < levels_[j].size(); ++i) os << (i ? "|" : "") << levels_[j][i]->describe();
            os << ']';
        }
        return os.str();
    }

    std::uint64_t hash() const { return fnv1a(describe()); }

private:
    NaifsSchedule(Space s, std::vector<Level> levels, std::size_t period, TailKind tail)
        : space_(s), levels_(std::move(levels)), period_(period), tail_(tail) {}

    static Space first_space(const std::vector<Level>& levels) {
        if (levels.empty()) throw InputError("schedule: at least one level is required");
        for (const auto& lv : levels) {
            if (lv.empty()) throw InputError("schedule: every level must contain at least one map");
            for (const auto& f : lv)
                if (!f) throw InputError("schedule: null map");
        }
        const Space s = levels.front().front()->space();
        for (const auto& lv : levels)
            for (const auto& f : lv)
                if (!(f->space() == s)) throw InputError("schedule: maps act on different spaces");
        return s;
    }

    template <class Get>
    double fold(Get get, bool take_min) const {
        double v = take_min ? 1e300 : 0.0;
        for (const auto& lv : levels_)
            for (const auto& f : lv) v = take_min ? std::min(v, get(f->info())) : std::max(v, get(f->info()));
        return v;
    }

    Space space_;
    std::vector<Level> levels_;
    std::size_t period_;
    TailKind tail_;
};

struct Word {
    std::size_t start = 1;
    std::vector<std::uint32_t> symbols;

    std::size_t size() const { return symbols.size(); }

    /// w|^k: the suffix starting k symbols later, as a word from level start + k.
    Word suffix(std::size_t k) const {
        if (k > symbols.size()) throw InputError("word suffix beyond the word length");
        return Word{start + k, std::vector<std::uint32_t>(symbols.begin() + static_cast<std::ptrdiff_t>(k), symbols.end())};
    }
    /// w|_k: the first k symbols.
    Word prefix(std::size_t k) const {
        if (k > symbols.size()) throw InputError("word prefix beyond the word length");
        return Word{start, std::vector<std::uint32_t>(symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(k))};
    }

    friend bool operator==(const Word&, const Word&) = default;
};

inline void check_word(const NaifsSchedule& s, const Word& w) {
    if (w.start < 1) throw InputError("word start level must be >= 1");
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w.symbols[i] >= s.level_size(w.start + i))
            throw InputError("word symbol " + std::to_string(w.symbols[i]) + " out of range at level " +
                             std::to_string(w.start + i));
}

inline Point apply_word(const NaifsSchedule& s, const Word& w, std::size_t k, Point x) {
    if (k > w.size()) throw InputError("apply_word: k exceeds the word length");
    if (x.dim != s.space().dim()) throw InputError("apply_word: point dimension mismatch");
    for (std::size_t i = 0; i < k; ++i) s.map(w.start + i, w.symbols[i]).apply(x.data());
    return x;
}

inline std::vector<Point> orbit(const NaifsSchedule& s, const Word& w, Point x) {
    if (x.dim != s.space().dim()) throw InputError("orbit: point dimension mismatch");
    std::vector<Point> out;
    out.reserve(w.size() + 1);
    out.push_back(x);
    for (std::size_t i = 0; i < w.size(); ++i) {
        s.map(w.start + i, w.symbols[i]).apply(x.data());
        out.push_back(x);
    }
    return out;
}

/// d_{w,k}(x, y) = max_{0<=j<=k} d(phi^j x, phi^j y).
inline double bowen_distance(const NaifsSchedule& s, const Word& w, std::size_t k, Point x, Point y) {
    if (k > w.size()) throw InputError("bowen_distance: k exceeds the word length");
    const Space& sp = s.space();
    double d = sp.distance(x, y);
    for (std::size_t i = 0; i < k; ++i) {
        const Map& f = s.map(w.start + i, w.symbols[i]);
        f.apply(x.data());
        f.apply(y.data());
        d = std::max(d, sp.distance(x, y));
    }
    return d;
}

/// Membership in the open dynamical ball B(center; w, k, eps).
inline bool in_dynamical_ball(const NaifsSchedule& s, const Word& w, std::size_t k, const Point& center, double eps,
                              const Point& y) {
    if (!(eps > 0.0)) throw InputError("in_dynamical_ball: eps must be positive");
    return bowen_distance(s, w, k, center, y) < eps;
}

/// Shifted system: level'(j) = level(j + k - 1).
inline NaifsSchedule shifted(const NaifsSchedule& s, std::size_t k) {
    if (k < 1) throw InputError("shifted: k must be >= 1");
    if (k == 1) return s;
    const std::size_t len = s.prefix_length();
    const std::size_t p = s.period();
    const std::size_t new_len = std::max(len >= k ? len - k + 1 : 0, p);
    std::vector<Level> levels;
    levels.reserve(new_len);
    for (std::size_t j = 1; j <= new_len; ++j) levels.push_back(s.level(j + k - 1));
    if (s.tail() == TailKind::constant) return NaifsSchedule::constant_tail(std::move(levels));
    return NaifsSchedule::periodic(std::move(levels), p);
}

/// Blocked system Phi^n: level j holds the compositions of all n-words
/// starting at level (j-1)n + 1, in lexicographic symbol order.
inline NaifsSchedule blocked(const NaifsSchedule& s, std::size_t n, std::size_t max_level_size = 1u << 20) {
    if (n < 1) throw InputError("blocked: n must be >= 1");
    if (n == 1) return s;
    const std::size_t len = s.prefix_length();
    const std::size_t p = s.period();
    // Original levels are periodic from len - p + 1 on; blocked level j only
    // reads original levels >= (j-1)n + 1.
    const std::size_t periodic_from = len - p + 1;
    std::size_t j0 = 1;
    while ((j0 - 1) * n + 1 < periodic_from) ++j0;
    const std::size_t new_p = p / std::gcd(n, p);
    const std::size_t count = j0 + new_p - 1;

    std::vector<Level> levels;
    for (std::size_t j = 1; j <= count; ++j) {
        const std::size_t m = (j - 1) * n + 1;
        const BigInt total = s.word_count(m, n);
        if (total > max_level_size) throw InputError("blocked: level would contain too many maps");
        const auto size = static_cast<std::size_t>(total);
        Level lv;
        lv.reserve(size);
        for (std::size_t idx = 0; idx < size; ++idx) {
            std::size_t rest = idx;
            std::vector<MapRef> parts(n);
            for (std::size_t i = n; i-- > 0;) {
                const std::size_t r = s.level_size(m + i);
                parts[i] = s.level(m + i)[rest % r];
                rest /= r;
            }
            lv.push_back(std::make_shared<ComposedMap>(std::move(parts)));
        }
        levels.push_back(std::move(lv));
    }
    return NaifsSchedule::periodic(std::move(levels), new_p);
}

/// Words of I^{m,n}: all of them in lexicographic order, or `budget` i.i.d.
/// uniform draws. Word i of a sampled ensemble depends only on (seed, i), so
/// any partition of the index range reproduces the same sequence.
class WordEnsemble {
public:
    enum class Mode { exhaustive, sampled };

    WordEnsemble(const NaifsSchedule& s, std::size_t m, std::size_t n, std::size_t budget, std::uint64_t seed)
        : start_(m), length_(n), seed_(seed) {
        if (m < 1) throw InputError("words: start level must be >= 1");
        if (budget < 1) throw InputError("words: budget must be >= 1");
        size_ = s.word_count(m, n);
        radix_.reserve(n);
        for (std::size_t j = 0; j < n; ++j) radix_.push_back(static_cast<std::uint32_t>(s.level_size(m + j)));
        if (size_ <= budget) {
            mode_ = Mode::exhaustive;
            count_ = static_cast<std::size_t>(size_);
        } else {
            mode_ = Mode::sampled;
            count_ = budget;
        }
    }

    Mode mode() const { return mode_; }
    bool sampled() const { return mode_ == Mode::sampled; }
    std::size_t start() const { return start_; }
    std::size_t length() const { return length_; }
    std::uint64_t seed() const { return seed_; }
    /// Exact #(I^{m,n}).
    const BigInt& ensemble_size() const { return size_; }
    /// Number of words this ensemble yields.
    std::size_t count() const { return count_; }

    Word at(std::size_t i) const {
        if (i >= count_) throw InputError("word ensemble index out of range");
        Word w{start_, std::vector<std::uint32_t>(length_)};
        if (mode_ == Mode::exhaustive) {
            std::size_t rest = i;
            for (std::size_t j = length_; j-- > 0;) {
                w.symbols[j] = static_cast<std::uint32_t>(rest % radix_[j]);
                rest /= radix_[j];
            }
        } else {
            Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(i)));
            for (std::size_t j = 0; j < length_; ++j) w.symbols[j] = static_cast<std::uint32_t>(rng.below(radix_[j]));
        }
        return w;
    }

    std::vector<Word> all() const {
        std::vector<Word> out;
        out.reserve(count_);
        for (std::size_t i = 0; i < count_; ++i) out.push_back(at(i));
        return out;
    }

private:
    std::size_t start_;
    std::size_t length_;
    std::uint64_t seed_;
    BigInt size_;
    std::vector<std::uint32_t> radix_;
    Mode mode_ = Mode::exhaustive;
    std::size_t count_ = 0;
};

inline WordEnsemble words(const NaifsSchedule& s, std::size_t m, std::size_t n, std::size_t budget, std::uint64_t seed) {
    if (n < 1) throw InputError("words: n must be >= 1");
    return WordEnsemble(s, m, n, budget, seed);
}

} // namespace naifs
