#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace impent {

/// Raised for malformed arguments: dimension mismatches, negative times,
/// empty samples, unaligned grids.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an impulsive trajectory is queried past the last impulse
/// window that could be resolved (truncated itinerary).
class horizon_exhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxDim = 4;

/*
 * One-sided binary sequence.
 *
 * The stored prefix holds `length()` symbols; every symbol past it reads as 0,
 * so a Word is always a concrete point of the full 2-shift. Short words live
 * entirely in `head_`; long ones share an immutable block store and shift by
 * moving an offset.
 */
class Word {
public:
    static constexpr std::uint64_t npos = std::numeric_limits<std::uint64_t>::max();

    Word() = default;

    static Word from_u64(std::uint64_t bits, std::uint64_t length) {
        Word w;
        if (length > 64) throw invalid_input("Word::from_u64: length exceeds 64");
        w.end_ = length;
        w.head_ = length == 64 ? bits : (bits & ((std::uint64_t{1} << length) - 1));
        return w;
    }

    static Word from_symbols(std::span<const std::uint8_t> symbols) {
        Word w;
        w.end_ = symbols.size();
        if (symbols.size() <= 64) {
            for (std::size_t i = 0; i < symbols.size(); ++i)
                if (symbols[i]) w.head_ |= std::uint64_t{1} << i;
            return w;
        }
        auto blocks = std::make_shared<std::vector<std::uint64_t>>((symbols.size() + 63) / 64, 0);
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i]) (*blocks)[i / 64] |= std::uint64_t{1} << (i % 64);
        w.blocks_ = std::move(blocks);
        w.head_ = w.window(0);
        return w;
    }

    /// Symbols remaining in the stored prefix.
    std::uint64_t length() const { return end_ > offset_ ? end_ - offset_ : 0; }

    /// Next 64 symbols, bit i = symbol i.
    std::uint64_t head() const { return head_; }

    int symbol(std::uint64_t i) const {
        if (i < 64) return static_cast<int>((head_ >> i) & 1U);
        if (!blocks_) return 0;
        return static_cast<int>(window(offset_ + i) & 1U);
    }

    /// σⁿ applied to this word.
    Word shifted(std::uint64_t n) const {
        if (n == 0) return *this;
        Word w = *this;
        if (!blocks_) {
            w.head_ = n >= 64 ? 0 : head_ >> n;
            w.end_ = end_ > n ? end_ - n : 0;
            return w;
        }
        w.offset_ = offset_ + n;
        w.head_ = w.window(w.offset_);
        return w;
    }

    /// Index of the first differing symbol, or npos for identical sequences.
    friend std::uint64_t first_difference(const Word& a, const Word& b) {
        std::uint64_t x = a.head_ ^ b.head_;
        if (x != 0) return static_cast<std::uint64_t>(std::countr_zero(x));
        const std::uint64_t span = std::max(a.length(), b.length());
        for (std::uint64_t pos = 64; pos < span; pos += 64) {
            x = a.relative_window(pos) ^ b.relative_window(pos);
            if (x != 0) return pos + static_cast<std::uint64_t>(std::countr_zero(x));
        }
        return npos;
    }

    friend bool operator==(const Word& a, const Word& b) { return first_difference(a, b) == npos; }

private:
    std::uint64_t relative_window(std::uint64_t pos) const {
        if (!blocks_) return pos < 64 ? head_ >> pos : 0;
        return window(offset_ + pos);
    }

    // 64 symbols starting at absolute index `pos`, zero past end_.
    std::uint64_t window(std::uint64_t pos) const {
        if (pos >= end_) return 0;
        const auto& blk = *blocks_;
        const std::uint64_t idx = pos / 64, sh = pos % 64;
        std::uint64_t lo = idx < blk.size() ? blk[idx] >> sh : 0;
        if (sh != 0 && idx + 1 < blk.size()) lo |= blk[idx + 1] << (64 - sh);
        const std::uint64_t avail = end_ - pos;
        if (avail < 64) lo &= (std::uint64_t{1} << avail) - 1;
        return lo;
    }

    std::shared_ptr<const std::vector<std::uint64_t>> blocks_;
    std::uint64_t offset_ = 0;
    std::uint64_t end_ = 0;
    std::uint64_t head_ = 0;
};

/// A state of some MetricSpace. Symbolic spaces use `word` plus coords[0] as
/// the height in [0,1).
struct Point {
    std::array<double, kMaxDim> coords{};
    std::uint8_t dim = 0;
    Word word;

    Point() = default;
    Point(std::initializer_list<double> c) {
        if (c.size() > kMaxDim) throw invalid_input("Point: too many coordinates");
        dim = static_cast<std::uint8_t>(c.size());
        std::copy(c.begin(), c.end(), coords.begin());
    }

    static Point from_coords(std::span<const double> c) {
        if (c.size() > kMaxDim) throw invalid_input("Point: too many coordinates");
        Point p;
        p.dim = static_cast<std::uint8_t>(c.size());
        std::copy(c.begin(), c.end(), p.coords.begin());
        return p;
    }

    static Point symbolic(Word w, double height) {
        Point p{height};
        p.word = std::move(w);
        return p;
    }

    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }

    std::span<const double> values() const { return {coords.data(), dim}; }
};

} // namespace impent
