#pragma once

// Initial term structure: quote table, bootstrap, log-linear discounting and
// par swap rates.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

namespace ccsa {

class CurveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class QuoteKind { money_market, par_swap };

struct MarketQuote {
    std::string label;            // "1m", "6m", "2y", ...
    double maturity = 0.0;        // years
    QuoteKind kind = QuoteKind::money_market;
    double rate = 0.0;            // decimal per annum
    std::optional<double> df;     // quoted discount factor, if the table has one
};

/// Year fraction of a tenor label. Money-market tenors are ACT/360 with a
/// 30-day month ("1m" -> 30/360, "1y" -> 360/360); swap tenors are whole years.
inline double tenor_to_years(const std::string& label) {
    if (label.size() < 2) throw CurveError("bad tenor label '" + label + "'");
    const char unit = static_cast<char>(std::tolower(static_cast<unsigned char>(label.back())));
    double count = 0.0;
    try {
        std::size_t used = 0;
        count = std::stod(label.substr(0, label.size() - 1), &used);
        if (used != label.size() - 1) throw std::invalid_argument(label);
    } catch (const std::exception&) {
        throw CurveError("bad tenor label '" + label + "'");
    }
    switch (unit) {
        case 'd': return count / 360.0;
        case 'w': return 7.0 * count / 360.0;
        case 'm': return 30.0 * count / 360.0;
        case 'y': return count;
        default: throw CurveError("bad tenor unit in '" + label + "'");
    }
}

inline QuoteKind parse_quote_kind(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "money-market" || s == "mm" || s == "deposit") return QuoteKind::money_market;
    if (s == "par-swap" || s == "swap") return QuoteKind::par_swap;
    throw CurveError("unknown quote kind '" + s + "'");
}

inline std::string to_string(QuoteKind k) { return k == QuoteKind::money_market ? "money-market" : "par-swap"; }

/// EUR quotes at 2012-06-15: EURIBOR deposits up to 1y, annual swaps beyond.
inline std::vector<MarketQuote> reference_market_quotes() {
    struct Row { const char* label; QuoteKind kind; double rate; double df; };
    static constexpr Row rows[] = {
        {"1m", QuoteKind::money_market, 0.00382, 0.9997}, {"3m", QuoteKind::money_market, 0.00662, 0.9983},
        {"6m", QuoteKind::money_market, 0.00939, 0.9953}, {"1y", QuoteKind::money_market, 0.01226, 0.9879},
        {"2y", QuoteKind::par_swap, 0.00876, 0.9827},     {"3y", QuoteKind::par_swap, 0.00985, 0.9710},
        {"4y", QuoteKind::par_swap, 0.01151, 0.9553},     {"5y", QuoteKind::par_swap, 0.01331, 0.9360},
        {"7y", QuoteKind::par_swap, 0.01632, 0.8929},     {"10y", QuoteKind::par_swap, 0.01949, 0.8245},
        {"12y", QuoteKind::par_swap, 0.02089, 0.7802},    {"15y", QuoteKind::par_swap, 0.02204, 0.7211},
        {"20y", QuoteKind::par_swap, 0.02211, 0.6457},    {"25y", QuoteKind::par_swap, 0.02202, 0.5802},
        {"30y", QuoteKind::par_swap, 0.02193, 0.5217},
    };
    std::vector<MarketQuote> out;
    for (const auto& r : rows) out.push_back({r.label, tenor_to_years(r.label), r.kind, r.rate, r.df});
    return out;
}

/// Discount curve on pillars (t, df) with log-linear interpolation.
/// Immutable after construction.
class YieldCurve {
public:
    struct Pillar {
        double t;
        double df;
    };

    YieldCurve() : pillars_{{0.0, 1.0}} {}

    /// Pillars must start at t = 0 with df = 1 and be strictly increasing.
    explicit YieldCurve(std::vector<Pillar> pillars) : pillars_(std::move(pillars)) {
        if (pillars_.empty() || pillars_.front().t != 0.0 || pillars_.front().df != 1.0)
            throw CurveError("curve must start with pillar (0, 1)");
        for (std::size_t i = 1; i < pillars_.size(); ++i) {
            if (!(pillars_[i].t > pillars_[i - 1].t))
                throw CurveError("pillar times must be strictly increasing");
            if (!(pillars_[i].df > 0.0) || !std::isfinite(pillars_[i].df))
                throw CurveError("discount factors must be positive and finite");
        }
    }

    const std::vector<Pillar>& pillars() const noexcept { return pillars_; }
    double max_time() const noexcept { return pillars_.back().t; }

    double discount_factor(double t) const {
        check_range(t);
        const std::size_t i = segment(t);
        const auto& a = pillars_[i];
        const auto& b = pillars_[i + 1];
        if (t == b.t) return b.df;
        if (t == a.t) return a.df;
        const double w = (t - a.t) / (b.t - a.t);
        return std::exp((1.0 - w) * std::log(a.df) + w * std::log(b.df));
    }

    /// Instantaneous forward f(0, t): the slope of -ln df on the segment
    /// holding t (right-continuous, so f(0, 0) is the first segment's rate).
    double instantaneous_forward(double t) const {
        check_range(t);
        if (pillars_.size() == 1) return 0.0;
        std::size_t i = segment(t);
        if (t == pillars_[i + 1].t && i + 2 < pillars_.size()) ++i;
        const auto& a = pillars_[i];
        const auto& b = pillars_[i + 1];
        return -(std::log(b.df) - std::log(a.df)) / (b.t - a.t);
    }

    /// Continuously compounded zero rate; the t -> 0 limit is f(0, 0).
    double zero_rate(double t) const {
        if (t == 0.0) return instantaneous_forward(0.0);
        return -std::log(discount_factor(t)) / t;
    }

private:
    void check_range(double t) const {
        if (!(t >= 0.0)) throw CurveError("negative time " + std::to_string(t));
        if (t > max_time() * (1.0 + 1e-12))
            throw CurveError("time " + std::to_string(t) + " beyond last pillar " + std::to_string(max_time()));
    }

    // Index i with pillars_[i].t <= t <= pillars_[i + 1].t.
    std::size_t segment(double t) const {
        if (pillars_.size() == 1) throw CurveError("curve has no pillar beyond t = 0");
        auto it = std::upper_bound(pillars_.begin(), pillars_.end(), t,
                                   [](double v, const Pillar& p) { return v < p.t; });
        std::size_t i = static_cast<std::size_t>(std::distance(pillars_.begin(), it));
        i = i == 0 ? 0 : i - 1;
        return std::min(i, pillars_.size() - 2);
    }

    std::vector<Pillar> pillars_;
};

inline double discount_factor(const YieldCurve& curve, double t) { return curve.discount_factor(t); }

enum class CurveSource {
    quoted_df_first,  // use the quote table's df column when present
    bootstrap,        // ignore quoted dfs, derive every pillar from rates
};

/// Builds a curve from quotes sorted by maturity. Money-market pillars use
/// simple compounding; swap pillars are bootstrapped against annual 30/360
/// fixed legs, with missing annual dates interpolated log-linearly.
inline YieldCurve build_curve(const std::vector<MarketQuote>& quotes,
                              CurveSource source = CurveSource::quoted_df_first) {
    if (quotes.empty()) throw CurveError("no quotes");
    std::vector<YieldCurve::Pillar> pillars{{0.0, 1.0}};
    double last_t = 0.0;
    for (const auto& q : quotes) {
        if (!(q.maturity > last_t)) throw CurveError("quote maturities must be positive and strictly increasing");
        if (!std::isfinite(q.rate)) throw CurveError("non-finite rate for " + q.label);
        last_t = q.maturity;

        if (source == CurveSource::quoted_df_first && q.df) {
            pillars.push_back({q.maturity, *q.df});
            continue;
        }
        double df = 0.0;
        if (q.kind == QuoteKind::money_market) {
            const double denom = 1.0 + q.rate * q.maturity;
            if (!(denom > 0.0)) throw CurveError("rate implies df <= 0 for " + q.label);
            df = 1.0 / denom;
        } else {
            const double years = std::round(q.maturity);
            if (std::abs(years - q.maturity) > 1e-9 || years < 1.0)
                throw CurveError("swap pillar " + q.label + " is not a whole number of years");
            // Fixed-leg annuity with the unknown pillar df appended; annual
            // dates past the last known pillar are log-linear in the unknown.
            auto residual = [&](double log_df) {
                std::vector<YieldCurve::Pillar> trial = pillars;
                trial.push_back({q.maturity, std::exp(log_df)});
                const YieldCurve c(trial);
                double annuity = 0.0;
                for (int j = 1; j <= static_cast<int>(years); ++j) annuity += c.discount_factor(j);
                return q.rate * annuity + c.discount_factor(q.maturity) - 1.0;
            };
            boost::uintmax_t iters = 200;
            const auto tol = boost::math::tools::eps_tolerance<double>(52);
            const auto [lo, hi] = boost::math::tools::toms748_solve(residual, std::log(1e-6), std::log(2.0), tol, iters);
            df = std::exp(0.5 * (lo + hi));
            if (!(df > 0.0)) throw CurveError("bootstrap failed for " + q.label);
        }
        pillars.push_back({q.maturity, df});
    }
    return YieldCurve(std::move(pillars));
}

/// Rate k equating a fixed leg paid fixed_freq times a year to the floating
/// leg 1 - df(T).
inline double par_swap_rate(const YieldCurve& curve, double maturity, int fixed_freq) {
    if (fixed_freq <= 0) throw CurveError("fixed frequency must be positive");
    const double periods = maturity * fixed_freq;
    const long n = std::lround(periods);
    if (n <= 0 || std::abs(periods - static_cast<double>(n)) > 1e-9)
        throw CurveError("maturity is not a multiple of the fixed period");
    if (maturity > curve.max_time() * (1.0 + 1e-12)) throw CurveError("swap maturity beyond curve");
    const double accrual = 1.0 / fixed_freq;
    double annuity = 0.0;
    for (long j = 1; j <= n; ++j) annuity += accrual * curve.discount_factor(static_cast<double>(j) * accrual);
    return (1.0 - curve.discount_factor(maturity)) / annuity;
}

// CSV: maturity_label,kind,rate,df_optional  (header row required; '#' comments)
inline std::vector<MarketQuote> parse_quotes_csv(std::istream& in) {
    std::vector<MarketQuote> out;
    std::string line;
    bool header = true;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3) throw CurveError("line " + std::to_string(line_no) + ": expected at least 3 columns");
        for (auto& c : cells) {
            c.erase(0, c.find_first_not_of(" \t"));
            c.erase(c.find_last_not_of(" \t") + 1);
        }
        MarketQuote q;
        q.label = cells[0];
        q.maturity = tenor_to_years(cells[0]);
        q.kind = parse_quote_kind(cells[1]);
        try {
            q.rate = std::stod(cells[2]);
            if (cells.size() > 3 && !cells[3].empty()) q.df = std::stod(cells[3]);
        } catch (const std::exception&) {
            throw CurveError("line " + std::to_string(line_no) + ": bad number");
        }
        out.push_back(q);
    }
    return out;
}

inline std::vector<MarketQuote> load_quotes_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CurveError("cannot open curve file '" + path + "'");
    return parse_quotes_csv(in);
}

}  // namespace ccsa
