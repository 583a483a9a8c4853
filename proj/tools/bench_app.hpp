#pragma once

// Benchmark harness: generates synthetic problems, runs each algorithm,
// compares empirical errors against the corresponding bounds, and emits
// deterministic CSV reports.  Trials parallelize over a worker pool; rows
// are buffered per trial and written in trial order, so output bytes do
// not depend on the worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rnla/rnla.hpp"

namespace rnla::bench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotConverged = 3;

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(Index v) { return std::to_string(v); }

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::string> rows;

    void add_row(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        rows.push_back(std::move(line));
    }

    void write(std::ostream& out) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out << ',';
            out << header[i];
        }
        out << '\n';
        for (const auto& r : rows) out << r << '\n';
    }
};

inline int worker_count(long long trials) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("RNLA_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = static_cast<unsigned>(std::min<long>(v, 64));
    }
    return static_cast<int>(std::min<long long>(hw, std::max<long long>(trials, 1)));
}

// Runs fn(trial) across the pool; results land in trial order.
template <typename Fn>
std::vector<std::string> run_trials(long long trials, Fn&& fn) {
    std::vector<std::string> rows(static_cast<std::size_t>(trials));
    const int workers = worker_count(trials);
    if (workers <= 1) {
        for (long long t = 0; t < trials; ++t) rows[static_cast<std::size_t>(t)] = fn(t);
        return rows;
    }
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long long t = next.fetch_add(1);
                if (t >= trials) return;
                rows[static_cast<std::size_t>(t)] = fn(t);
            }
        });
    }
    for (auto& th : pool) th.join();
    return rows;
}

struct ExperimentConfig {
    std::string subcommand;
    std::uint64_t seed = 0;
    Index n = 0, d = 0, m = 0, k = 0, r = 0, s = 0;
    long long t_steps = 0;
    long long trials = 1;
    double eps = 0.5, eta = 0.0, mu = 1e-3, tol = 1e-8, ratio = 0.5, cond = 1e6;
    int zeta = 8;
    std::string kind = "gaussian";
    std::string dist = "signs";
    bool uniform = false;
    bool noncommuting = false;
    std::string matrix_path, rhs_path, out_path;
};

inline TestVectorDist parse_dist(const std::string& name) {
    if (name == "signs") return TestVectorDist::signs;
    if (name == "sphere") return TestVectorDist::sphere;
    if (name == "gaussian") return TestVectorDist::gaussian;
    throw std::invalid_argument("unknown test-vector distribution '" + name + "'");
}

inline Embedding build_embedding(const std::string& kind, Index s, Index n, int zeta, RngStream rng) {
    if (kind == "gaussian") return build_gaussian(s, n, rng);
    if (kind == "srtt") return build_srtt(s, n, rng);
    if (kind == "sparse") return build_sparse_sign(s, n, zeta, rng);
    throw std::invalid_argument("unknown embedding kind '" + kind + "'");
}

inline std::vector<double> geometric(Index len, double first, double ratio) {
    std::vector<double> v;
    double x = first;
    for (Index i = 0; i < len; ++i) {
        v.push_back(x);
        x *= ratio;
    }
    return v;
}

// --- subcommands ---------------------------------------------------------

inline int cmd_trace(const ExperimentConfig& cfg, CsvTable& csv) {
    Matrix a;
    if (!cfg.matrix_path.empty()) {
        a = read_matrix_market(cfg.matrix_path);
    } else {
        // Spectrum (1, alpha, ..., alpha) hits the requested intrinsic dim.
        const double alpha = (cfg.eta - 1.0) / double(cfg.n - 1);
        std::vector<double> spec{1.0};
        for (Index i = 1; i < cfg.n; ++i) spec.push_back(alpha);
        RngStream gen = make_stream(cfg.seed, 1);
        a = gen_psd(SpectrumSpec(spec), gen);
    }
    const double id = intdim(a);
    const long long s = trace_samples_needed(id, cfg.eps);
    const double tr = a.trace();
    const double bound = 2.0 / (cfg.eps * cfg.eps * double(s) * id);
    const MatVecOracle oracle = MatVecOracle::from_matrix(a);
    const TestVectorDist dist = parse_dist(cfg.dist);

    csv.header = {"trial", "substream", "seed",   "n",      "s",     "eps",
                  "estimate", "variance_estimate", "rel_err", "failed", "bound"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const TraceEstimate est = hutchinson(oracle, s, dist, substream(master, t));
        const double rel = std::abs(est.value - tr) / std::abs(tr);
        std::vector<std::string> cells{fmt((long long)t),
                                       fmt((long long)t),
                                       fmt((long long)cfg.seed),
                                       fmt(a.rows()),
                                       fmt(s),
                                       fmt(cfg.eps),
                                       fmt(est.value),
                                       fmt(est.variance_estimate),
                                       fmt(rel),
                                       fmt((long long)(rel >= cfg.eps ? 1 : 0)),
                                       fmt(bound)};
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
        return line;
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_matmul(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = cfg.matrix_path.empty() ? standard_normal_matrix(cfg.n, cfg.d, gen)
                                             : read_matrix_market(cfg.matrix_path);
    const Matrix b = a * a.transpose();
    const auto [v, l] = mc_stats(matmul_decomposition(a, cfg.uniform));
    const double bound = matrix_mc_error_bound(v, l, b.rows(), b.cols(), cfg.s);

    csv.header = {"trial", "substream", "seed", "n", "d", "s", "spectral_err", "bound", "v", "L"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const auto est = approx_matmul(a, cfg.s, substream(master, t), cfg.uniform);
        const double err = spectral_norm(Matrix(est.matrix - b));
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << a.rows() << ',' << a.cols() << ','
           << cfg.s << ',' << fmt(err) << ',' << fmt(bound) << ',' << fmt(v) << ',' << fmt(l);
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_sparsify(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix b = cfg.matrix_path.empty() ? standard_normal_matrix(cfg.m, cfg.n, gen)
                                             : read_matrix_market(cfg.matrix_path);
    csv.header = {"trial", "substream", "seed", "m", "n", "s", "nnz", "spectral_err", "bound"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const auto est = sparsify(b, cfg.s, substream(master, t));
        const double err = spectral_norm(Matrix(est.coo.to_dense() - b));
        std::ostringstream os;
        // No closed-form bound is asserted for the sparsifier.
        os << t << ',' << t << ',' << cfg.seed << ',' << b.rows() << ',' << b.cols() << ','
           << cfg.s << ',' << est.coo.entries.size() << ',' << fmt(err) << ',';
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_power(const ExperimentConfig& cfg, CsvTable& csv) {
    Matrix a;
    if (!cfg.matrix_path.empty()) {
        a = read_matrix_market(cfg.matrix_path);
    } else {
        RngStream gen = make_stream(cfg.seed, 1);
        a = gen_psd(SpectrumSpec(geometric(cfg.n, 1.0, cfg.ratio)), gen);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    const double l1 = es.eigenvalues()(a.rows() - 1);
    const double l2 = a.rows() > 1 ? es.eigenvalues()(a.rows() - 2) : 0.0;
    const MatVecOracle oracle = MatVecOracle::from_matrix(a);

    RngStream master = make_stream(cfg.seed);
    std::vector<std::vector<double>> errs(static_cast<std::size_t>(cfg.trials));
    run_trials(cfg.trials, [&](long long t) {
        const PowerTrace tr = rand_power_method(oracle, cfg.t_steps, substream(master, t));
        auto& e = errs[static_cast<std::size_t>(t)];
        e.reserve(tr.estimates.size());
        for (double xi : tr.estimates) e.push_back(relative_error(xi, l1));
        return std::string{};
    });

    csv.header = {"t", "mean_err", "gap_bound", "n", "ratio", "trials", "seed"};
    for (long long t = 0; t <= cfg.t_steps; ++t) {
        double acc = 0.0;
        for (const auto& e : errs) acc += e[static_cast<std::size_t>(t)];
        const double bound = l2 < l1 ? gap_bound(a.rows(), l1, l2, t) : 0.0;
        csv.add_row({fmt(t), fmt(acc / double(cfg.trials)), fmt(bound), fmt(a.rows()),
                     fmt(l2 / l1), fmt(cfg.trials), fmt((long long)cfg.seed)});
    }
    return kExitOk;
}

inline int cmd_rsvd(const ExperimentConfig& cfg, CsvTable& csv) {
    const Index len = std::min(cfg.m, cfg.n);
    std::vector<double> sigma = geometric(len, 1.0, 0.5); // 2^{1-i}
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix b = cfg.matrix_path.empty()
                         ? gen_with_singular_values(cfg.m, cfg.n, SpectrumSpec(sigma), gen)
                         : read_matrix_market(cfg.matrix_path);
    const MatVecOracle oracle = MatVecOracle::from_matrix(b);
    std::string bound_cell;
    if (cfg.s >= cfg.r + 2 && cfg.matrix_path.empty())
        bound_cell = fmt(rsvd_error_bound(SpectrumSpec(sigma), cfg.r, cfg.s));

    csv.header = {"trial", "substream", "seed", "m", "n", "r", "s", "err_fro_sq", "bound"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const LowRankApprox ap = randomized_svd(oracle, cfg.s, substream(master, t));
        const double err = (b - ap.dense()).squaredNorm();
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << b.rows() << ',' << b.cols() << ','
           << cfg.r << ',' << cfg.s << ',' << fmt(err) << ',' << bound_cell;
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_rpcholesky(const ExperimentConfig& cfg, CsvTable& csv) {
    const auto spec = geometric(cfg.n, 1.0, 0.9);
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = cfg.matrix_path.empty() ? gen_psd(SpectrumSpec(spec), gen)
                                             : read_matrix_market(cfg.matrix_path);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    double tail = 0.0;
    for (Index i = 0; i < a.rows() - cfg.r; ++i) tail += std::max(es.eigenvalues()(i), 0.0);
    const double eta = tail / a.trace();
    const Index k = rpc_rank_needed(cfg.r, cfg.eps, eta);
    const double bound = (1.0 + cfg.eps) * tail;

    csv.header = {"trial", "substream", "seed", "n",          "r",    "k",
                  "eps",   "trace_err", "bound", "entry_evals"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const EntryOracle oracle = EntryOracle::from_matrix(a);
        const CholFactor f = rpcholesky(oracle, k, std::nullopt, substream(master, t));
        const double err = (a - f.dense()).trace();
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << a.rows() << ',' << cfg.r << ',' << k
           << ',' << fmt(cfg.eps) << ',' << fmt(err) << ',' << fmt(bound) << ','
           << oracle.entry_eval_count();
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_kaczmarz(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    Matrix a;
    Vector x_star;
    Vector b;
    if (!cfg.matrix_path.empty()) {
        a = read_matrix_market(cfg.matrix_path);
        if (cfg.rhs_path.empty()) throw std::invalid_argument("kaczmarz: --matrix requires --rhs");
        const Matrix bm = read_matrix_market(cfg.rhs_path);
        b = bm.col(0);
        x_star = LsProblem(a, b).solve_dense();
    } else {
        std::vector<double> spec;
        for (Index i = 0; i < cfg.d; ++i)
            spec.push_back(4.0 - 3.0 * double(i) / double(std::max<Index>(cfg.d - 1, 1)));
        a = gen_with_singular_values(cfg.n, cfg.d, SpectrumSpec(spec), gen);
        x_star = standard_normal_vector(cfg.d, gen);
        b = a * x_star;
    }
    const LsProblem problem(a, b);
    const double kdem = demmel_cond(a);
    const double rate = 1.0 - 1.0 / (kdem * kdem);
    const double e0 = x_star.squaredNorm();

    RngStream master = make_stream(cfg.seed);
    std::vector<std::vector<double>> errs(static_cast<std::size_t>(cfg.trials));
    run_trials(cfg.trials, [&](long long t) {
        const auto tr =
            rand_kaczmarz(problem, Vector::Zero(a.cols()), cfg.t_steps, substream(master, t));
        errs[static_cast<std::size_t>(t)] = tr.errors_sq(x_star);
        return std::string{};
    });

    csv.header = {"t", "mean_err_sq", "bound", "n", "d", "kappa_dem", "trials", "seed"};
    for (long long t = 0; t <= cfg.t_steps; ++t) {
        double acc = 0.0;
        for (const auto& e : errs) acc += e[static_cast<std::size_t>(t)];
        csv.add_row({fmt(t), fmt(acc / double(cfg.trials)), fmt(std::pow(rate, double(t)) * e0),
                     fmt(a.rows()), fmt(a.cols()), fmt(kdem), fmt(cfg.trials),
                     fmt((long long)cfg.seed)});
    }
    return kExitOk;
}

inline int cmd_sketch_ls(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = standard_normal_matrix(cfg.n, cfg.d, gen);
    const Vector b = standard_normal_vector(cfg.n, gen);
    const LsProblem problem(a, b);
    const double opt = (a * problem.solve_dense() - b).norm();
    Matrix ab(cfg.n, cfg.d + 1);
    ab.leftCols(cfg.d) = a;
    ab.col(cfg.d) = b;
    const Matrix basis = orth(ab);

    csv.header = {"trial", "substream", "seed", "n", "d", "s", "kind",
                  "eps",   "residual",  "opt_residual", "ratio", "bound"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const Embedding e = build_embedding(cfg.kind, cfg.s, cfg.n, cfg.zeta, substream(master, t));
        const double eps = distortion(e, basis);
        const auto res = sketch_solve_ls(problem, e);
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << cfg.n << ',' << cfg.d << ',' << cfg.s
           << ',' << cfg.kind << ',' << fmt(eps) << ',' << fmt(res.residual_norm) << ','
           << fmt(opt) << ',' << fmt(res.residual_norm / opt) << ','
           << fmt((1.0 + eps) / (1.0 - eps));
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_iter_sketch(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = standard_normal_matrix(cfg.n, cfg.d, gen);
    const Vector b = standard_normal_vector(cfg.n, gen);
    const LsProblem problem(a, b);
    const Vector x_star = problem.solve_dense();

    const Embedding e = build_embedding(cfg.kind, cfg.s, cfg.n, cfg.zeta, make_stream(cfg.seed));
    const auto tr = iterative_sketch_ls(problem, e, cfg.t_steps);

    csv.header = {"t", "rel_x_err", "residual", "n", "d", "s", "seed"};
    for (std::size_t t = 0; t < tr.iterates.size(); ++t) {
        csv.add_row({fmt((long long)t), fmt((tr.iterates[t] - x_star).norm() / x_star.norm()),
                     fmt(tr.residual_norms[t]), fmt(cfg.n), fmt(cfg.d), fmt(cfg.s),
                     fmt((long long)cfg.seed)});
    }
    return tr.aborted ? kExitNotConverged : kExitOk;
}

inline int cmd_whiten(const ExperimentConfig& cfg, CsvTable& csv) {
    std::vector<double> spec;
    for (Index i = 0; i < cfg.d; ++i)
        spec.push_back(std::pow(cfg.cond, -double(i) / double(std::max<Index>(cfg.d - 1, 1))));
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = gen_with_singular_values(cfg.n, cfg.d, SpectrumSpec(spec), gen);
    const double kappa_before = spec.front() / spec.back();

    csv.header = {"trial", "substream", "seed", "n", "d", "s",
                  "eps",   "kappa_before", "kappa_after", "bound"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const Embedding e = build_embedding(cfg.kind, cfg.s, cfg.n, cfg.zeta, substream(master, t));
        const auto wh = whiten(a, e);
        Eigen::JacobiSVD<Matrix> svd(wh.whitened(a));
        const double kappa_after =
            svd.singularValues()(0) / svd.singularValues()(cfg.d - 1);
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << cfg.n << ',' << cfg.d << ',' << cfg.s
           << ',' << fmt(wh.eps) << ',' << fmt(kappa_before) << ',' << fmt(kappa_after) << ','
           << fmt(wh.kappa_bound);
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_nullspace(const ExperimentConfig& cfg, CsvTable& csv) {
    std::vector<double> spec;
    for (Index i = 0; i < cfg.d; ++i) spec.push_back(double(cfg.d - i));
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = gen_with_singular_values(cfg.n, cfg.d, SpectrumSpec(spec), gen);
    double tail = 0.0;
    for (Index i = cfg.d - cfg.k; i < cfg.d; ++i) tail += spec[i] * spec[i];
    const Matrix basis = orth(a);

    csv.header = {"trial", "substream", "seed", "n", "d", "k", "s", "eps", "energy", "tail", "bound"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const Embedding e = build_embedding(cfg.kind, cfg.s, cfg.n, cfg.zeta, substream(master, t));
        const double eps = distortion(e, basis);
        const Matrix w = approx_null_space(a, cfg.k, e);
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << cfg.n << ',' << cfg.d << ',' << cfg.k
           << ',' << cfg.s << ',' << fmt(eps) << ',' << fmt((a * w).squaredNorm()) << ','
           << fmt(tail) << ',' << fmt((1.0 + eps) / (1.0 - eps) * tail);
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

inline int cmd_precond_cg(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix a = gen_psd(SpectrumSpec(geometric(cfg.n, 0.5, 0.5)), gen);

    csv.header = {"trial", "substream", "seed", "n", "k", "mu", "tol",
                  "iters_pcg", "iters_cg", "converged"};
    RngStream master = make_stream(cfg.seed);
    bool all_converged = true;
    for (long long t = 0; t < cfg.trials; ++t) {
        RngStream rs = substream(master, t);
        const Vector b = standard_normal_vector(cfg.n, rs);
        const EntryOracle oracle = EntryOracle::from_matrix(a);
        const NystromPreconditioner p =
            build_preconditioner(oracle, cfg.k, cfg.mu, substream(rs, 1));
        const auto pre = pcg_solve(a, b, cfg.mu, p, cfg.tol, 5000);
        const NystromPreconditioner scalar{Matrix(cfg.n, 0), Vector(0), cfg.mu};
        const auto plain = pcg_solve(a, b, cfg.mu, scalar, cfg.tol, 5000);
        all_converged = all_converged && pre.converged && plain.converged;
        csv.add_row({fmt(t), fmt(t), fmt((long long)cfg.seed), fmt(cfg.n), fmt(cfg.k),
                     fmt(cfg.mu), fmt(cfg.tol), fmt(pre.iterations), fmt(plain.iterations),
                     fmt((long long)(pre.converged && plain.converged ? 1 : 0))});
    }
    return all_converged ? kExitOk : kExitNotConverged;
}

inline int cmd_embed_check(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    const Matrix u = haar_orthogonal(cfg.n, gen).leftCols(cfg.d);

    csv.header = {"trial", "substream", "seed", "kind", "n", "d", "s", "eps"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const Embedding e = build_embedding(cfg.kind, cfg.s, cfg.n, cfg.zeta, substream(master, t));
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << cfg.kind << ',' << cfg.n << ',' << cfg.d
           << ',' << cfg.s << ',' << fmt(distortion(e, u));
        return os.str();
    });

    // Summary quantiles of the measured distortion.
    std::vector<double> eps_values;
    eps_values.reserve(rows.size());
    for (const auto& r : rows) {
        const auto pos = r.rfind(',');
        eps_values.push_back(std::strtod(r.c_str() + pos + 1, nullptr));
    }
    std::sort(eps_values.begin(), eps_values.end());
    csv.rows = std::move(rows);
    for (const auto& [label, q] : std::vector<std::pair<std::string, double>>{
             {"q00", 0.0}, {"q25", 0.25}, {"q50", 0.5}, {"q75", 0.75}, {"q100", 1.0}}) {
        const auto idx = static_cast<std::size_t>(q * double(eps_values.size() - 1) + 0.5);
        csv.add_row({label, "", fmt((long long)cfg.seed), cfg.kind, fmt(cfg.n), fmt(cfg.d),
                     fmt(cfg.s), fmt(eps_values[idx])});
    }
    return kExitOk;
}

inline int cmd_jointdiag(const ExperimentConfig& cfg, CsvTable& csv) {
    RngStream gen = make_stream(cfg.seed, 1);
    Matrix a, b;
    if (cfg.noncommuting) {
        a = standard_normal_matrix(cfg.n, cfg.n, gen);
        a = 0.5 * (a + a.transpose()).eval();
        b = standard_normal_matrix(cfg.n, cfg.n, gen);
        b = 0.5 * (b + b.transpose()).eval();
    } else {
        const Matrix q = haar_orthogonal(cfg.n, gen);
        Vector l1(cfg.n), l2(cfg.n);
        for (Index i = 0; i < cfg.n; ++i) {
            l1(i) = double(cfg.n - i);
            l2(i) = double(i * i) / double(cfg.n);
        }
        a = q * l1.asDiagonal() * q.transpose();
        b = q * l2.asDiagonal() * q.transpose();
    }

    csv.header = {"trial", "substream", "seed", "n", "commuting", "res_a", "res_b"};
    RngStream master = make_stream(cfg.seed);
    auto rows = run_trials(cfg.trials, [&](long long t) {
        const JointDiagResult r = joint_diagonalize(a, b, substream(master, t));
        std::ostringstream os;
        os << t << ',' << t << ',' << cfg.seed << ',' << cfg.n << ','
           << (cfg.noncommuting ? 0 : 1) << ',' << fmt(r.off_residual_a) << ','
           << fmt(r.off_residual_b);
        return os.str();
    });
    csv.rows = std::move(rows);
    return kExitOk;
}

// --- driver ---------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"randomized numerical linear algebra benchmark harness"};
    app.require_subcommand(1);

    // Each subcommand owns its configuration so defaults cannot clobber
    // one another across registrations.
    std::array<ExperimentConfig, 14> cfgs;

    auto add_common = [&](CLI::App* sub, ExperimentConfig& c) {
        sub->add_option("--seed", c.seed, "master seed");
        sub->add_option("--trials", c.trials, "number of trials")->check(CLI::PositiveNumber);
        sub->add_option("--out", c.out_path, "output CSV path (default stdout)");
    };

    auto& c0 = cfgs[0];
    c0 = ExperimentConfig{.n = 64, .eps = 0.5, .eta = 8.0, .dist = "signs"};
    auto* trace = app.add_subcommand("trace", "Monte Carlo trace estimation vs Chebyshev bound");
    trace->add_option("--n", c0.n, "matrix dimension");
    trace->add_option("--intdim", c0.eta, "target intrinsic dimension");
    trace->add_option("--eps", c0.eps, "relative error tolerance");
    trace->add_option("--dist", c0.dist, "test vector distribution");
    trace->add_option("--matrix", c0.matrix_path, "psd input matrix (MatrixMarket)");
    add_common(trace, c0);

    auto& c1 = cfgs[1];
    c1 = ExperimentConfig{.n = 8, .d = 12, .s = 100};
    auto* matmul = app.add_subcommand("matmul", "approximate A A* vs matrix Monte Carlo bound");
    matmul->add_option("--n", c1.n, "rows of A");
    matmul->add_option("--d", c1.d, "columns of A");
    matmul->add_option("--s", c1.s, "samples");
    matmul->add_flag("--uniform", c1.uniform, "uniform column sampling probabilities");
    matmul->add_option("--matrix", c1.matrix_path, "input matrix (MatrixMarket)");
    add_common(matmul, c1);

    auto& c2 = cfgs[2];
    c2 = ExperimentConfig{.n = 5, .m = 5, .s = 100};
    auto* sparsify = app.add_subcommand("sparsify", "entrywise sparsification");
    sparsify->add_option("--m", c2.m, "rows");
    sparsify->add_option("--n", c2.n, "columns");
    sparsify->add_option("--s", c2.s, "samples");
    sparsify->add_option("--matrix", c2.matrix_path, "input matrix (MatrixMarket)");
    add_common(sparsify, c2);

    auto& c3 = cfgs[3];
    c3 = ExperimentConfig{.n = 16, .t_steps = 20, .ratio = 0.5};
    auto* power = app.add_subcommand("power", "randomized power method vs gap bound");
    power->add_option("--n", c3.n, "dimension");
    power->add_option("--ratio", c3.ratio, "lambda2/lambda1");
    power->add_option("--T", c3.t_steps, "iterations");
    power->add_option("--matrix", c3.matrix_path, "psd input matrix (MatrixMarket)");
    add_common(power, c3);

    auto& c4 = cfgs[4];
    c4 = ExperimentConfig{.n = 15, .m = 20, .r = 3, .s = 6};
    auto* rsvd = app.add_subcommand("rsvd", "randomized SVD vs expected-error bound");
    rsvd->add_option("--m", c4.m, "rows");
    rsvd->add_option("--n", c4.n, "columns");
    rsvd->add_option("--r", c4.r, "comparison rank");
    rsvd->add_option("--s", c4.s, "samples");
    rsvd->add_option("--matrix", c4.matrix_path, "input matrix (MatrixMarket)");
    add_common(rsvd, c4);

    auto& c5 = cfgs[5];
    c5 = ExperimentConfig{.n = 300, .r = 5, .eps = 0.5};
    auto* rpchol = app.add_subcommand("rpcholesky", "randomly pivoted Cholesky vs trace bound");
    rpchol->add_option("--n", c5.n, "dimension");
    rpchol->add_option("--r", c5.r, "comparison rank");
    rpchol->add_option("--eps", c5.eps, "tolerance");
    rpchol->add_option("--matrix", c5.matrix_path, "psd input matrix (MatrixMarket)");
    add_common(rpchol, c5);

    auto& c6 = cfgs[6];
    c6 = ExperimentConfig{.n = 50, .d = 5, .t_steps = 200};
    auto* kacz = app.add_subcommand("kaczmarz", "randomized Kaczmarz vs convergence bound");
    kacz->add_option("--n", c6.n, "rows");
    kacz->add_option("--d", c6.d, "columns");
    kacz->add_option("--T", c6.t_steps, "iterations");
    kacz->add_option("--matrix", c6.matrix_path, "input matrix (MatrixMarket)");
    kacz->add_option("--rhs", c6.rhs_path, "right-hand side (MatrixMarket)");
    add_common(kacz, c6);

    auto& c7 = cfgs[7];
    c7 = ExperimentConfig{.n = 200, .d = 3, .s = 64, .kind = "gaussian"};
    auto* skls = app.add_subcommand("sketch-ls", "sketch-and-solve residual ratio");
    skls->add_option("--n", c7.n, "rows");
    skls->add_option("--d", c7.d, "columns");
    skls->add_option("--s", c7.s, "embedding dimension");
    skls->add_option("--kind", c7.kind, "embedding kind");
    skls->add_option("--zeta", c7.zeta, "sparse-sign nonzeros per column");
    add_common(skls, c7);

    auto& c8 = cfgs[8];
    c8 = ExperimentConfig{.n = 300, .d = 10, .s = 250, .t_steps = 40, .kind = "gaussian"};
    auto* itsk = app.add_subcommand("iter-sketch", "iterative sketching convergence");
    itsk->add_option("--n", c8.n, "rows");
    itsk->add_option("--d", c8.d, "columns");
    itsk->add_option("--s", c8.s, "embedding dimension");
    itsk->add_option("--iters", c8.t_steps, "iterations");
    itsk->add_option("--kind", c8.kind, "embedding kind");
    itsk->add_option("--zeta", c8.zeta, "sparse-sign nonzeros per column");
    add_common(itsk, c8);

    auto& c9 = cfgs[9];
    c9 = ExperimentConfig{.n = 500, .d = 20, .s = 320, .cond = 1e6, .kind = "gaussian"};
    auto* wh = app.add_subcommand("whiten", "randomized Gram-Schmidt conditioning");
    wh->add_option("--n", c9.n, "rows");
    wh->add_option("--d", c9.d, "columns");
    wh->add_option("--s", c9.s, "embedding dimension");
    wh->add_option("--cond", c9.cond, "condition number of A");
    wh->add_option("--kind", c9.kind, "embedding kind");
    wh->add_option("--zeta", c9.zeta, "sparse-sign nonzeros per column");
    add_common(wh, c9);

    auto& c10 = cfgs[10];
    c10 = ExperimentConfig{.n = 100, .d = 5, .k = 2, .s = 70, .kind = "gaussian"};
    auto* nullsp = app.add_subcommand("nullspace", "sketched trailing singular subspace");
    nullsp->add_option("--n", c10.n, "rows");
    nullsp->add_option("--d", c10.d, "columns");
    nullsp->add_option("--k", c10.k, "null space dimension");
    nullsp->add_option("--s", c10.s, "embedding dimension");
    nullsp->add_option("--kind", c10.kind, "embedding kind");
    nullsp->add_option("--zeta", c10.zeta, "sparse-sign nonzeros per column");
    add_common(nullsp, c10);

    auto& c11 = cfgs[11];
    c11 = ExperimentConfig{.n = 500, .k = 50, .mu = 1e-3, .tol = 1e-8};
    auto* pcg = app.add_subcommand("precond-cg", "Nystrom-preconditioned CG paired run");
    pcg->add_option("--n", c11.n, "dimension");
    pcg->add_option("--k", c11.k, "preconditioner rank");
    pcg->add_option("--mu", c11.mu, "ridge parameter");
    pcg->add_option("--tol", c11.tol, "relative residual tolerance");
    add_common(pcg, c11);

    auto& c12 = cfgs[12];
    c12 = ExperimentConfig{.n = 256, .d = 8, .s = 64, .kind = "srtt"};
    auto* emb = app.add_subcommand("embed-check", "measured distortion of an embedding");
    emb->add_option("--kind", c12.kind, "embedding kind");
    emb->add_option("--n", c12.n, "ambient dimension");
    emb->add_option("--d", c12.d, "subspace dimension");
    emb->add_option("--s", c12.s, "embedding dimension");
    emb->add_option("--zeta", c12.zeta, "sparse-sign nonzeros per column");
    add_common(emb, c12);

    auto& c13 = cfgs[13];
    c13 = ExperimentConfig{.n = 8};
    auto* jd = app.add_subcommand("jointdiag", "randomized joint diagonalization residuals");
    jd->add_option("--n", c13.n, "dimension");
    jd->add_flag("--noncommuting", c13.noncommuting, "use a generic noncommuting pair");
    add_common(jd, c13);

    // CLI11 wants argv order reversed.
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitValidation;
    }

    CsvTable csv;
    int code = kExitValidation;
    std::string out_path;
    try {
        if (trace->parsed()) {
            auto& cfg = cfgs[0];
            if (cfg.matrix_path.empty() && (cfg.n < 2 || cfg.eta < 1.0 || cfg.eta > double(cfg.n)))
                throw std::invalid_argument("trace: need n >= 2 and 1 <= intdim <= n");
            if (!(cfg.eps > 0.0)) throw std::invalid_argument("trace: eps must be positive");
            out_path = cfg.out_path;
            code = cmd_trace(cfg, csv);
        } else if (matmul->parsed()) {
            auto& cfg = cfgs[1];
            if (cfg.n < 1 || cfg.d < 1 || cfg.s < 1)
                throw std::invalid_argument("matmul: need positive n, d, s");
            out_path = cfg.out_path;
            code = cmd_matmul(cfg, csv);
        } else if (sparsify->parsed()) {
            auto& cfg = cfgs[2];
            if (cfg.m < 1 || cfg.n < 1 || cfg.s < 1)
                throw std::invalid_argument("sparsify: need positive m, n, s");
            out_path = cfg.out_path;
            code = cmd_sparsify(cfg, csv);
        } else if (power->parsed()) {
            auto& cfg = cfgs[3];
            if (cfg.n < 2 || !(cfg.ratio >= 0.0 && cfg.ratio < 1.0) || cfg.t_steps < 0)
                throw std::invalid_argument("power: need n >= 2, 0 <= ratio < 1, T >= 0");
            out_path = cfg.out_path;
            code = cmd_power(cfg, csv);
        } else if (rsvd->parsed()) {
            auto& cfg = cfgs[4];
            if (cfg.s < 1 || cfg.s > std::min(cfg.m, cfg.n) || cfg.r < 1)
                throw std::invalid_argument("rsvd: need 1 <= s <= min(m,n) and r >= 1");
            out_path = cfg.out_path;
            code = cmd_rsvd(cfg, csv);
        } else if (rpchol->parsed()) {
            auto& cfg = cfgs[5];
            if (cfg.n < 2 || cfg.r < 1 || !(cfg.eps > 0.0))
                throw std::invalid_argument("rpcholesky: need n >= 2, r >= 1, eps > 0");
            out_path = cfg.out_path;
            code = cmd_rpcholesky(cfg, csv);
        } else if (kacz->parsed()) {
            auto& cfg = cfgs[6];
            if (cfg.matrix_path.empty() && (cfg.d < 1 || cfg.n < cfg.d))
                throw std::invalid_argument("kaczmarz: need n >= d >= 1");
            out_path = cfg.out_path;
            code = cmd_kaczmarz(cfg, csv);
        } else if (skls->parsed()) {
            auto& cfg = cfgs[7];
            if (cfg.n < cfg.d + 1 || cfg.s < 1)
                throw std::invalid_argument("sketch-ls: need n > d and s >= 1");
            out_path = cfg.out_path;
            code = cmd_sketch_ls(cfg, csv);
        } else if (itsk->parsed()) {
            auto& cfg = cfgs[8];
            if (cfg.n < cfg.d || cfg.s < cfg.d)
                throw std::invalid_argument("iter-sketch: need n >= d and s >= d");
            out_path = cfg.out_path;
            code = cmd_iter_sketch(cfg, csv);
        } else if (wh->parsed()) {
            auto& cfg = cfgs[9];
            if (cfg.n < cfg.d || cfg.s < cfg.d || !(cfg.cond >= 1.0))
                throw std::invalid_argument("whiten: need n >= d, s >= d, cond >= 1");
            out_path = cfg.out_path;
            code = cmd_whiten(cfg, csv);
        } else if (nullsp->parsed()) {
            auto& cfg = cfgs[10];
            if (cfg.k < 1 || cfg.k > cfg.d || cfg.n < cfg.d)
                throw std::invalid_argument("nullspace: need 1 <= k <= d <= n");
            out_path = cfg.out_path;
            code = cmd_nullspace(cfg, csv);
        } else if (pcg->parsed()) {
            auto& cfg = cfgs[11];
            if (cfg.n < 1 || cfg.k < 0 || !(cfg.mu > 0.0) || !(cfg.tol > 0.0))
                throw std::invalid_argument("precond-cg: need n >= 1, k >= 0, mu > 0, tol > 0");
            out_path = cfg.out_path;
            code = cmd_precond_cg(cfg, csv);
        } else if (emb->parsed()) {
            auto& cfg = cfgs[12];
            if (cfg.d < 1 || cfg.d > cfg.n || cfg.s < 1)
                throw std::invalid_argument("embed-check: need 1 <= d <= n and s >= 1");
            out_path = cfg.out_path;
            code = cmd_embed_check(cfg, csv);
        } else if (jd->parsed()) {
            auto& cfg = cfgs[13];
            if (cfg.n < 2) throw std::invalid_argument("jointdiag: need n >= 2");
            out_path = cfg.out_path;
            code = cmd_jointdiag(cfg, csv);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    if (out_path.empty()) {
        csv.write(out);
    } else {
        std::ofstream f(out_path);
        if (!f) {
            err << "error: cannot open output path " << out_path << "\n";
            return kExitValidation;
        }
        csv.write(f);
    }
    return code;
}

} // namespace rnla::bench
