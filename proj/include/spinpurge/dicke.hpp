#pragma once

// Collective-spin layer for N identical spins coupled uniformly to the ancilla:
// multiplet degeneracies, the RT population ladder, exact steady-state purity.
//
// Half-integers are passed doubled (two_j = 2j, two_m = 2m) to stay exact.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "spinpurge/errors.hpp"

namespace spinpurge::dicke {

inline constexpr int kMaxExactSpins = 24;

// Exact non-negative-denominator fraction in lowest terms.
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1) {
    if (den == 0) throw InvalidArgument("zero denominator");
    set(static_cast<__int128>(num), static_cast<__int128>(den));
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    Rational r;
    r.set(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
          static_cast<__int128>(a.den_) * b.den_);
    return r;
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    Rational r;
    r.set(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

 private:
  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  void set(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const __int128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    if (n > lim || n < -lim || d > lim) throw LimitExceeded("rational overflow");
    num_ = static_cast<std::int64_t>(n);
    den_ = static_cast<std::int64_t>(d);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  return static_cast<std::uint64_t>(r);
}

inline void check_spin_count(int n) {
  if (n < 1) throw InvalidArgument("spin count must be >= 1");
  if (n > kMaxExactSpins) throw LimitExceeded("exact Dicke formulas support N <= " + std::to_string(kMaxExactSpins));
}

inline void check_two_j(int n, int two_j) {
  if (two_j < 0 || two_j > n || (n - two_j) % 2 != 0) {
    throw InvalidArgument("2j = " + std::to_string(two_j) + " is not a valid total spin for N = " + std::to_string(n));
  }
}

// Allowed 2j values, descending: N, N-2, ..., N mod 2.
inline std::vector<int> total_spins(int n) {
  check_spin_count(n);
  std::vector<int> out;
  for (int two_j = n; two_j >= 0; two_j -= 2) out.push_back(two_j);
  return out;
}

// Multiplicity of spin-j multiplets: (2j+1)/(N+1) * C(N+1, N/2 - j).
inline std::uint64_t degeneracy_dj(int n, int two_j) {
  check_spin_count(n);
  check_two_j(n, two_j);
  const unsigned __int128 c = binomial(n + 1, (n - two_j) / 2);
  const unsigned __int128 num = c * static_cast<unsigned>(two_j + 1);
  if (num % static_cast<unsigned>(n + 1) != 0) throw NumericalError("degeneracy formula not integral");
  return static_cast<std::uint64_t>(num / static_cast<unsigned>(n + 1));
}

// sqrt((j - m)(j + m + 1))
inline double jplus(int two_j, int two_m) {
  if (two_j < 0 || two_m < -two_j || two_m > two_j || (two_j - two_m) % 2 != 0) {
    throw InvalidArgument("m out of range for j");
  }
  return 0.5 * std::sqrt(static_cast<double>(two_j - two_m) * static_cast<double>(two_j + two_m + 2));
}

// Diagonal populations in the collective basis. Every one of the d_j copies of a
// spin-j multiplet carries the same ladder, stored once in `ladders`.
struct DickeTable {
  int n = 0;
  std::vector<int> two_j;                        // descending
  std::vector<std::uint64_t> degeneracy;         // d_j
  std::vector<std::vector<double>> ladders;      // per j: m = -j .. j

  static DickeTable maximally_mixed(int n) {
    DickeTable t;
    t.n = n;
    const double p = std::ldexp(1.0, -n);
    for (int tj : total_spins(n)) {
      t.two_j.push_back(tj);
      t.degeneracy.push_back(degeneracy_dj(n, tj));
      t.ladders.emplace_back(static_cast<std::size_t>(tj + 1), p);
    }
    return t;
  }

  double total() const {
    double s = 0.0;
    for (std::size_t b = 0; b < ladders.size(); ++b)
      s += static_cast<double>(degeneracy[b]) * std::accumulate(ladders[b].begin(), ladders[b].end(), 0.0);
    return s;
  }

  double purity() const {
    double s = 0.0;
    for (std::size_t b = 0; b < ladders.size(); ++b)
      for (double p : ladders[b]) s += static_cast<double>(degeneracy[b]) * p * p;
    return s;
  }
};

// One RT cycle: population climbs from m-1 to m with probability sin^2(J+_{j,m-1} theta).
inline DickeTable rt_recurrence_step(const DickeTable& t, double theta) {
  DickeTable out = t;
  for (std::size_t b = 0; b < t.ladders.size(); ++b) {
    const int tj = t.two_j[b];
    const auto& p = t.ladders[b];
    auto& q = out.ladders[b];
    for (int k = 0; k <= tj; ++k) {
      const int two_m = 2 * k - tj;
      const double stay = std::cos(jplus(tj, two_m) * theta);
      double v = p[static_cast<std::size_t>(k)] * stay * stay;
      if (k > 0) {
        const double up = std::sin(jplus(tj, two_m - 2) * theta);
        v += p[static_cast<std::size_t>(k - 1)] * up * up;
      }
      q[static_cast<std::size_t>(k)] = v;
    }
  }
  return out;
}

// Recurrence angle matching the dense Hamiltonian: (g/2) * resonant segment duration.
inline double recurrence_angle(double g, double duration) { return 0.5 * g * duration; }

// Purity after each of n_cycles recurrence steps from the maximally mixed table.
inline std::vector<double> rt_recurrence_purities(int n, double theta, int n_cycles) {
  DickeTable t = DickeTable::maximally_mixed(n);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_cycles));
  for (int c = 0; c < n_cycles; ++c) {
    t = rt_recurrence_step(t, theta);
    out.push_back(t.purity());
  }
  return out;
}

// Closed form: even N (2N+1)/4^N C(N, N/2); odd N (N+3)/4^N C(N+1, (N-1)/2).
inline Rational rt_steady_polarization_exact(int n) {
  check_spin_count(n);
  const std::int64_t four_n = std::int64_t{1} << (2 * n);
  if (n % 2 == 0) {
    return Rational(static_cast<std::int64_t>(2 * n + 1) * static_cast<std::int64_t>(binomial(n, n / 2)), four_n);
  }
  return Rational(static_cast<std::int64_t>(n + 3) * static_cast<std::int64_t>(binomial(n + 1, (n - 1) / 2)), four_n);
}

inline double rt_steady_polarization(int n) { return rt_steady_polarization_exact(n).to_double(); }

// sum_j d_j ((2j+1)/2^N)^2
inline Rational steady_purity_weight_sum(int n) {
  check_spin_count(n);
  const std::int64_t two_n = std::int64_t{1} << n;
  Rational s;
  for (int tj : total_spins(n)) {
    const Rational q(tj + 1, two_n);
    s += Rational(static_cast<std::int64_t>(degeneracy_dj(n, tj))) * q * q;
  }
  return s;
}

// 1/(4^N (N+1)) sum_j (2j+1)^3 C(N+1, N/2 - j)
inline Rational steady_purity_cubic_sum(int n) {
  check_spin_count(n);
  std::int64_t acc = 0;
  for (int tj : total_spins(n)) {
    const std::int64_t w = tj + 1;
    acc += w * w * w * static_cast<std::int64_t>(binomial(n + 1, (n - tj) / 2));
  }
  return Rational(acc, (std::int64_t{1} << (2 * n)) * (n + 1));
}

// Even N: (N/2+1)(2N+1)/(4^N (N+1)) C(N+1, N/2). Odd N: (N+3)/4^N C(N+1, (N-1)/2).
inline Rational steady_purity_closed_form(int n) {
  check_spin_count(n);
  const std::int64_t four_n = std::int64_t{1} << (2 * n);
  if (n % 2 == 0) {
    return Rational(static_cast<std::int64_t>(n / 2 + 1) * (2 * n + 1) * static_cast<std::int64_t>(binomial(n + 1, n / 2)),
                    four_n * (n + 1));
  }
  return Rational(static_cast<std::int64_t>(n + 3) * static_cast<std::int64_t>(binomial(n + 1, (n - 1) / 2)), four_n);
}

// -sum_j d_j q_j ln q_j with q_j = (2j+1)/2^N.
inline double rt_steady_entropy(int n) {
  check_spin_count(n);
  double s = 0.0;
  for (int tj : total_spins(n)) {
    const double q = std::ldexp(static_cast<double>(tj + 1), -n);
    s -= static_cast<double>(degeneracy_dj(n, tj)) * q * std::log(q);
  }
  return s;
}

// ---- tail diagnostics ----

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;  // residual sum of squares
  std::size_t points = 0;
};

struct TailFit {
  int first_cycle = 0;
  int last_cycle = 0;
  LineFit exponential;  // ln eps vs n
  LineFit power_law;    // ln eps vs ln n
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.rss += r * r;
  }
  return f;
}

// eps[k] belongs to cycle k + 1. Points with eps <= floor are dropped.
inline TailFit fit_tail(const std::vector<double>& eps, int first_cycle, int last_cycle, double floor = 1e-300) {
  if (first_cycle < 1 || last_cycle < first_cycle) throw InvalidArgument("bad tail window");
  TailFit t{first_cycle, last_cycle, {}, {}};
  std::vector<double> n, ln_n, ln_e;
  for (int c = first_cycle; c <= last_cycle && c <= static_cast<int>(eps.size()); ++c) {
    const double e = eps[static_cast<std::size_t>(c - 1)];
    if (!(e > floor)) continue;
    n.push_back(c);
    ln_n.push_back(std::log(static_cast<double>(c)));
    ln_e.push_back(std::log(e));
  }
  t.exponential = least_squares(n, ln_e);
  t.power_law = least_squares(ln_n, ln_e);
  return t;
}

}  // namespace spinpurge::dicke
