#pragma once

#include "k3taut/filtration.hpp"
#include "k3taut/heisenberg.hpp"
#include "k3taut/identities.hpp"
#include "k3taut/newton.hpp"
#include "k3taut/sampling.hpp"
#include "k3taut/verifier.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace k3taut::suite {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;

  std::string line() const {
    std::ostringstream os;
    os << (passed ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << detail;
    os.precision(3);
    os << std::fixed << " (" << seconds << " s)";
    return os.str();
  }
};

struct SuiteOptions {
  SurfaceModel surface;
  unsigned workers = 1;
  VerifyOptions verify;
  std::uint32_t seed = 20240601;
};

/// Runs task(i) for i in [0, count) on `workers` threads pulling from a shared counter.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  if (workers == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class F>
CriterionResult timed(int id, std::string title, F body) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = since(t0);
  return r;
}

inline InstanceSpec all_omega_ch2(int n, int l) {
  InstanceSpec s;
  s.n = n;
  s.l = l;
  for (int t = 1; t <= l; ++t) s.omega.push_back(t);
  s.indices.assign(l, 2);
  return s;
}

/// Tally of verdicts over many instances, keeping the first failure.
struct Tally {
  std::mutex mu;
  std::size_t total = 0;
  std::size_t certified = 0;
  std::string first_failure;

  void record(const InstanceSpec& spec, const Verdict& v) {
    std::lock_guard lock(mu);
    ++total;
    if (v.certified())
      ++certified;
    else
      note_failure(spec, v);
  }

  // Caller holds mu.
  void note_failure(const InstanceSpec& spec, const Verdict& v) {
    if (first_failure.empty()) {
      std::ostringstream os;
      os << to_string(v.status) << " for n=" << spec.n << " k=" << spec.k << " l=" << spec.l
         << " alpha=" << alpha_to_string(*spec.alpha) << ": " << v.reason;
      first_failure = os.str();
    }
  }
};

/// One grid family: fixed k, l, alpha, Theta and assignment; indices vary.
struct GridFamily {
  int k = 0;
  int l = 0;
  std::shared_ptr<const AlphaNode> alpha;
  std::vector<int> theta;
  std::map<int, int> assignment;
};

inline std::vector<GridFamily> base_grid_families(const SurfaceModel& surface) {
  std::vector<GridFamily> out;
  for (int k = 0; k <= 2; ++k) {
    auto gens = sampling::alpha_generators(k, surface.ns_rank(), {2});
    std::vector<std::shared_ptr<const AlphaNode>> alphas;
    for (std::size_t a = 0; a < gens.size(); ++a) {
      alphas.push_back(std::make_shared<AlphaNode>(gens[a]));
      for (std::size_t b = std::max<std::size_t>(a, 1); a > 0 && b < gens.size(); ++b)
        alphas.push_back(std::make_shared<AlphaNode>(AlphaNode::mul({gens[a], gens[b]})));
    }
    for (int l = 1; l <= 5; ++l) {
      std::vector<std::vector<int>> thetas{{}};
      if (k > 0)
        for (int a = 1; a <= l; ++a) {
          thetas.push_back({a});
          for (int b = a + 1; b <= l; ++b) thetas.push_back({a, b});
        }
      for (const auto& alpha : alphas) {
        if (alpha_codim(*alpha) + l <= 2 + 2 * k) continue;
        for (const auto& theta : thetas) {
          int combos = 1;
          for (std::size_t i = 0; i < theta.size(); ++i) combos *= k;
          for (int code = 0; code < combos; ++code) {
            GridFamily f{k, l, alpha, theta, {}};
            int c = code;
            for (int t : theta) {
              f.assignment[t] = c % k + 1;
              c /= k;
            }
            out.push_back(std::move(f));
          }
        }
      }
    }
  }
  return out;
}

inline bool commutators_hold(const Heisenberg& h, int max_n, std::size_t& checked, std::string& failure) {
  for (int k = 0; k <= 1; ++k) {
    FactorSet inert = FactorSet::range(1, k);
    Factor ua = Factor::main(k + 1), ub = Factor::main(k + 2);
    for (int n = 0; n <= max_n; ++n) {
      auto states = n == 0 ? std::vector<FockVector>{h.vacuum(inert)} : h.basis_states(n, inert);
      for (const auto& s : states)
        for (int a : {-3, -2, -1, 1, 2, 3})
          for (int b : {-3, -2, -1, 1, 2, 3}) {
            auto lhs = h.apply(a, ua, h.apply(b, ub, s)) - h.apply(b, ub, h.apply(a, ua, s));
            ++checked;
            if (!(lhs == h.commutator_value(a, ua, b, ub, s))) {
              failure = "[q_" + std::to_string(a) + ", q_" + std::to_string(b) + "] fails on " + s.to_string();
              return false;
            }
          }
    }
  }
  return true;
}

}  // namespace detail

inline CriterionResult identity_suite(const SuiteOptions& o) {
  return detail::timed(1, "built-in identity suite", [&](CriterionResult& r) {
    auto t0 = detail::Clock::now();
    K3Ring ring(o.surface);
    std::vector<std::string> bad;
    std::size_t count = 0;
    for (const auto& name : identities::identity_names())
      for (const auto& id : identities::build(ring, name)) {
        ++count;
        if (!ring.is_zero(id.lhs)) bad.push_back(id.name);
      }
    double secs = detail::since(t0);
    r.passed = bad.empty() && secs < 1;
    r.detail = std::to_string(count - bad.size()) + "/" + std::to_string(count) + " reduce to the empty normal form";
    for (const auto& b : bad) r.detail += "; not reduced: " + b;
    if (secs >= 1) r.detail += "; exceeded 1 s";
  });
}

inline CriterionResult bv_equivalence(const SuiteOptions& o) {
  return detail::timed(2, "bv pushforward equals bv0", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    auto pushed = identities::bv_pushed_to_bv0(ring);
    auto direct = identities::bv0(ring);
    bool raw_equal = pushed == direct;
    bool nf_equal = ring.normalize(pushed) == ring.normalize(direct);
    r.passed = raw_equal && nf_equal && ring.normalize(direct).empty();
    r.detail = std::string("unreduced ") + (raw_equal ? "equal" : "differ") + ", normal forms " + (nf_equal ? "equal" : "differ");
  });
}

inline CriterionResult base_grid(const SuiteOptions& o) {
  return detail::timed(3, "n=1 base grid (k<=2, l<=5, i_t<=4, |Theta|<=2)", [&](CriterionResult& r) {
    auto t0 = detail::Clock::now();
    K3Ring ring(o.surface);
    auto families = detail::base_grid_families(o.surface);
    detail::Tally tally;
    parallel_for(families.size(), o.workers, [&](std::size_t fi) {
      const auto& f = families[fi];
      InstanceSpec spec;
      spec.n = 1;
      spec.k = f.k;
      spec.l = f.l;
      spec.alpha = f.alpha;
      spec.theta = f.theta;
      spec.assignment = f.assignment;
      for (int t = 1; t <= f.l; ++t)
        if (!f.assignment.count(t)) spec.omega.push_back(t);
      spec.indices.assign(f.l, 0);
      std::size_t local_total = 0, local_ok = 0;
      for (;;) {
        Verdict v = verify_instance(ring, spec, o.verify);
        ++local_total;
        if (v.certified()) {
          ++local_ok;
        } else {
          std::lock_guard lock(tally.mu);
          tally.note_failure(spec, v);
        }
        int pos = 0;
        while (pos < f.l && ++spec.indices[pos] > 4) spec.indices[pos++] = 0;
        if (pos == f.l) break;
      }
      std::lock_guard lock(tally.mu);
      tally.total += local_total;
      tally.certified += local_ok;
    });
    double secs = detail::since(t0);
    r.passed = tally.total > 0 && tally.certified == tally.total && secs < 300;
    r.detail = std::to_string(tally.certified) + "/" + std::to_string(tally.total) + " CertifiedZero over " +
               std::to_string(families.size()) + " families";
    if (!tally.first_failure.empty()) r.detail += "; first failure: " + tally.first_failure;
    if (secs >= 300) r.detail += "; exceeded 5 min";
  });
}

inline CriterionResult generalized_bv_n2(const SuiteOptions& o) {
  return detail::timed(4, "generalized identity at n=2, l=5, all ch_2", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    auto t0 = detail::Clock::now();
    Verdict v = verify_instance(ring, detail::all_omega_ch2(2, 5), o.verify);
    double secs = detail::since(t0);
    r.passed = v.certified() && secs < 600;
    r.detail = to_string(v.status) + ", peak " + std::to_string(v.peak_terms) + " terms";
    if (!v.reason.empty()) r.detail += ", " + v.reason;
  });
}

inline CriterionResult random_n2(const SuiteOptions& o) {
  return detail::timed(5, "50 random n=2 instances", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    std::mt19937 rng(o.seed);
    std::vector<InstanceSpec> specs;
    for (int i = 0; i < 50; ++i) specs.push_back(sampling::random_instance(o.surface, 2, 1, {5, 6}, {0, 2, 3, 4}, rng));
    // Most uniform draws contain a vanishing factor, so a second batch is
    // drawn from instances without one.
    std::vector<InstanceSpec> hard;
    while (hard.size() < 50) {
      auto s = sampling::random_instance(o.surface, 2, 1, {5, 6}, {0, 2, 3, 4}, rng);
      if (!gamma_trivially_zero(s)) hard.push_back(std::move(s));
    }
    detail::Tally tally, hard_tally;
    parallel_for(specs.size(), o.workers, [&](std::size_t i) { tally.record(specs[i], verify_instance(ring, specs[i], o.verify)); });
    parallel_for(hard.size(), o.workers, [&](std::size_t i) { hard_tally.record(hard[i], verify_instance(ring, hard[i], o.verify)); });
    r.passed = tally.certified == 50 && hard_tally.certified == 50;
    r.detail = std::to_string(tally.certified) + "/50 CertifiedZero, plus " + std::to_string(hard_tally.certified) +
               "/50 among instances with no vanishing factor";
    for (const auto* t : {&tally, &hard_tally})
      if (!t->first_failure.empty()) r.detail += "; first failure: " + t->first_failure;
  });
}

inline CriterionResult newton_roundtrip(const SuiteOptions& o) {
  return detail::timed(6, "Newton ch<->c round trip and c(E)c(-E)=1", [&](CriterionResult& r) {
    std::mt19937 rng(o.seed + 6);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 6), len(1, 8);
    int round_trips = 0, inverses = 0;
    for (int trial = 0; trial < 50; ++trial) {
      int N = len(rng);
      std::vector<Rational> ch(N + 1, Rational(0));
      for (int i = 1; i <= N; ++i) ch[i] = Rational(num(rng), den(rng));
      for (auto& x : ch) x.canonicalize();
      auto c = newton_c_from_ch(ch, Rational(1));
      if (newton_ch_from_c(c, Rational(1)) == ch) ++round_trips;
      auto prod = truncated_product(c, newton_c_from_ch(negate_ch(ch), Rational(1)), Rational(0));
      std::vector<Rational> unit(N + 1, Rational(0));
      unit[0] = 1;
      if (prod == unit) ++inverses;
    }
    r.passed = round_trips == 50 && inverses == 50;
    r.detail = std::to_string(round_trips) + "/50 round trips, " + std::to_string(inverses) + "/50 inverse checks";
  });
}

inline CriterionResult confluence(const SuiteOptions& o) {
  return detail::timed(7, "associativity and commutativity in the ring", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    std::mt19937 rng(o.seed + 7);
    std::uniform_int_distribution<int> pick_l(1, 5);
    int ok = 0;
    const int triples = 150;
    for (int i = 0; i < triples; ++i) {
      int l = pick_l(rng);
      auto a = sampling::random_class(ring, l, rng), b = sampling::random_class(ring, l, rng), c = sampling::random_class(ring, l, rng);
      bool assoc = ring.mul(ring.mul(a, b), c) == ring.mul(a, ring.mul(b, c));
      bool comm = ring.mul(a, b) == ring.mul(b, a);
      bool raw = ring.normalize(ring.raw_mul(ring.raw_mul(a, b), c)) == ring.mul(a, ring.mul(b, c));
      if (assoc && comm && raw) ++ok;
    }
    r.passed = ok == triples;
    r.detail = std::to_string(ok) + "/" + std::to_string(triples) + " triples agree exactly";
  });
}

inline CriterionResult heisenberg_checks(const SuiteOptions& o, int max_n = 3) {
  return detail::timed(8, "Heisenberg relations, injectivity, lowering closure", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    Heisenberg h(ring);
    std::size_t checked = 0;
    std::string failure;
    bool comm = detail::commutators_hold(h, max_n, checked, failure);
    bool inj = true;
    std::string inj_detail;
    for (int n = 1; n <= std::min(max_n, 4); ++n)
      for (int k = 0; k <= 1; ++k) {
        auto rep = injectivity_check(h, n, k);
        if (!rep.injective) {
          inj = false;
          inj_detail += " n=" + std::to_string(n) + ",k=" + std::to_string(k);
        }
      }
    auto closure = generate_lowering_closure(4);
    bool clo = closure.size() == 3 && closure[0].index == 2 && closure[1].index == 3 && closure[2].index == 4;
    r.passed = comm && inj && clo;
    r.detail = std::to_string(checked) + " commutators " + (comm ? "hold" : "FAIL") + ", injectivity " +
               (inj ? "holds" : "fails at" + inj_detail) + ", closure " + (clo ? "derives q_{-2}, q_{-3}, q_{-4}" : "incomplete");
    if (!failure.empty()) r.detail += "; " + failure;
  });
}

inline CriterionResult filtration_checks(const SuiteOptions& o) {
  return detail::timed(9, "point-square rule and filtration indices", [&](CriterionResult& r) {
    K3Ring plain(o.surface);
    K3Ring ps = point_square_ring(o.surface);
    bool rule = derive_point_square_rule(plain).certified;
    ZeroCycleExpr y;
    y.points[1] = 1;
    y.cx = -1;
    auto one = filtration_index(ps, y, 4);
    bool index_one = one.index == 1;
    bool effective = true;
    std::string indices;
    for (int i = 1; i <= 4; ++i) {
      auto rep = filtration_index(ps, ZeroCycleExpr::effective(i), i);
      effective = effective && rep.index && *rep.index <= i && rep.monotone;
      indices += (i > 1 ? "," : "") + (rep.index ? std::to_string(*rep.index) : std::string("?"));
    }
    r.passed = rule && index_one && effective;
    r.detail = std::string("rule ") + (rule ? "certified" : "NOT certified") + ", index([x]-c) = " +
               (one.index ? std::to_string(*one.index) : std::string("Unknown")) + ", effective indices " + indices;
  });
}

inline CriterionResult honesty(const SuiteOptions& o) {
  return detail::timed(10, "no false certificates", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    K3Ring ps = point_square_ring(o.surface);
    FactorSet fs{Factor::main(1)};
    Verdict single = verify_zero(ring, HilbExpr::ch(2, fs, Factor::main(1), 2), o.verify);
    Verdict below = verify_zero(ring, build_gamma_unchecked(ring, detail::all_omega_ch2(2, 4)), o.verify);
    auto unknown = filtration_index(ps, ZeroCycleExpr::effective(3), 2);
    bool ok = single.status == Status::Inconclusive && below.status == Status::Inconclusive && !unknown.index;
    r.passed = ok;
    r.detail = "ch_2(Ibar_2) alone: " + to_string(single.status) + ", n=2 l=4 below the bound: " + to_string(below.status) +
               ", index of 3-point cycle within m<=3: " + (unknown.index ? std::to_string(*unknown.index) : std::string("Unknown"));
  });
}

inline CriterionResult stretch(const SuiteOptions& o) {
  return detail::timed(11, "stretch: n=3, l=7, all ch_2", [&](CriterionResult& r) {
    K3Ring ring(o.surface);
    Verdict v = verify_instance(ring, detail::all_omega_ch2(3, 7), o.verify);
    r.passed = v.certified();
    r.detail = to_string(v.status) + ", peak " + std::to_string(v.peak_terms) + " terms";
    if (!v.reason.empty()) r.detail += ", " + v.reason;
  });
}

/// Criteria 1..10 in order, plus the stretch target when requested. Each
/// result is passed to `report` as soon as it is known.
inline std::vector<CriterionResult> run_all(const SuiteOptions& o, bool with_stretch,
                                            const std::function<void(const CriterionResult&)>& report = {}) {
  std::vector<std::function<CriterionResult()>> steps{
      [&] { return identity_suite(o); },  [&] { return bv_equivalence(o); },   [&] { return base_grid(o); },
      [&] { return generalized_bv_n2(o); }, [&] { return random_n2(o); },       [&] { return newton_roundtrip(o); },
      [&] { return confluence(o); },       [&] { return heisenberg_checks(o); }, [&] { return filtration_checks(o); },
      [&] { return honesty(o); }};
  if (with_stretch) steps.push_back([&] { return stretch(o); });
  std::vector<CriterionResult> out;
  for (auto& step : steps) {
    out.push_back(step());
    if (report) report(out.back());
  }
  return out;
}

}  // namespace k3taut::suite
