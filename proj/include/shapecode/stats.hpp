#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace shapecode {

/// Exact accumulator for metric values in [0, 1].
///
/// Values are held as integers in units of 2^-80, so sums are associative and
/// a stratum's sum equals the sum of its sub-strata bit for bit. Every double
/// >= 2^-28 is represented exactly; the metrics here are 0 or >= 2^-18.
class FixedSum {
public:
    static constexpr int kFractionBits = 80;

    void add(double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("FixedSum accepts values in [0, 1]");
        total_ += static_cast<__int128>(std::ldexp(v, kFractionBits));
        ++count_;
    }

    FixedSum& operator+=(const FixedSum& other) noexcept {
        total_ += other.total_;
        count_ += other.count_;
        return *this;
    }

    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] __int128 raw() const noexcept { return total_; }

    /// Mean rounded to double. Divides in integers first so the mean of n
    /// copies of v is exactly v.
    [[nodiscard]] double mean() const {
        if (count_ == 0) throw std::domain_error("mean of empty set");
        const auto n = static_cast<__int128>(count_);
        const __int128 q = total_ / n;
        const __int128 r = total_ % n;
        const double whole = std::ldexp(static_cast<double>(q), -kFractionBits);
        return whole + std::ldexp(static_cast<double>(r) / static_cast<double>(count_), -kFractionBits);
    }

    friend bool operator==(const FixedSum&, const FixedSum&) = default;

private:
    __int128 total_ = 0;
    std::size_t count_ = 0;
};

}  // namespace shapecode
