// respca: low-rank plus sparse decomposition from the command line.
//
// Subcommands: decompose, synth, bench, outliers, frames.
// Exit codes: 0 success, 2 usage/input error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "respca/io.hpp"
#include "respca/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace respca;

namespace {

enum class Format { Csv, Binary, PgmDir };

Format detect_format(const fs::path& input) {
    if (fs::is_directory(input)) return Format::PgmDir;
    const auto ext = input.extension().string();
    if (ext == ".csv") return Format::Csv;
    if (ext == ".bin" || ext == ".respca") return Format::Binary;
    // fall back to sniffing the magic
    std::ifstream is(input, std::ios::binary);
    char magic[8] = {};
    is.read(magic, 8);
    if (is && std::string_view(magic, 7) == "RESPCA1") return Format::Binary;
    return Format::Csv;
}

DenseMatrix load_matrix(const fs::path& input, Format fmt) {
    switch (fmt) {
        case Format::Csv: return io::read_csv_matrix(input);
        case Format::Binary: return io::read_binary_matrix(input);
        case Format::PgmDir: return io::read_pgm_stack(input).first;
    }
    throw std::logic_error("unreachable");
}

void save_matrix(const fs::path& path, const DenseMatrix& m, Format fmt) {
    if (fmt == Format::Binary) {
        io::write_binary_matrix(path, m);
    } else {
        io::write_csv_matrix(path, m);
    }
}

void write_report(const fs::path& path, const DecompositionResult& res,
                  const SolverConfig& cfg) {
    std::ofstream os(path);
    for (std::size_t t = 0; t < res.report.feas.size(); ++t) {
        json line = {
            {"iter", t + 1},
            {"feas", res.report.feas[t]},
            {"dL", res.report.delta_l[t]},
            {"dS", res.report.delta_s[t]},
            {"objective", res.report.objective[t]},
        };
        os << line.dump() << '\n';
    }
    json summary = {
        {"converged", res.report.converged},
        {"iters", res.report.iters},
        {"lambda", res.lambda},
        {"rho0", cfg.rho0},
        {"kappa", cfg.kappa},
        {"tol", cfg.tol},
        {"groups", cfg.c},
        {"wall_time", res.wall_time},
        {"final_feas", res.report.feas.empty() ? 0.0 : res.report.feas.back()},
    };
    os << summary.dump() << '\n';
}

struct SolveFlags {
    std::string input;
    std::size_t groups = 1;
    std::string lambda = "auto";
    double rho0 = 1e-4;
    double kappa = 1.5;
    double tol = 1e-3;
    std::size_t max_iter = 500;
    std::string norm = "l1";
    std::uint64_t seed = 0;
};

void add_solve_flags(CLI::App* app, SolveFlags& f) {
    app->add_option("--input", f.input, "input matrix (csv|bin) or PGM directory")
        ->required();
    app->add_option("--groups", f.groups, "number of column groups c")->required();
    app->add_option("--lambda", f.lambda, "balancing parameter or 'auto'");
    app->add_option("--rho0", f.rho0, "initial penalty");
    app->add_option("--kappa", f.kappa, "penalty growth factor");
    app->add_option("--tol", f.tol, "relative residual tolerance");
    app->add_option("--max-iter", f.max_iter, "iteration cap");
    app->add_option("--norm", f.norm, "sparse norm: l1 or l21")
        ->check(CLI::IsMember({"l1", "l21"}));
    app->add_option("--seed", f.seed, "clustering seed");
}

SolverConfig to_config(const SolveFlags& f) {
    SolverConfig cfg;
    if (f.lambda != "auto") cfg.lambda = std::stod(f.lambda);
    cfg.rho0 = f.rho0;
    cfg.kappa = f.kappa;
    cfg.tol = f.tol;
    cfg.max_iter = f.max_iter;
    cfg.c = f.groups;
    cfg.sparse_norm = f.norm == "l21" ? SparseNorm::L21 : SparseNorm::L1;
    cfg.kmeans.seed = f.seed;
    return cfg;
}

int run_decompose(const SolveFlags& f, const std::string& out_l,
                  const std::string& out_s, const std::string& report) {
    const fs::path input(f.input);
    if (!fs::exists(input)) {
        std::cerr << "error: input does not exist: " << f.input << "\n";
        return 2;
    }
    const Format fmt = detect_format(input);
    DenseMatrix x = load_matrix(input, fmt);
    if (f.groups == 0 || f.groups > x.cols()) {
        std::cerr << "error: --groups must be in [1, " << x.cols() << "]\n";
        return 2;
    }
    auto res = solve(x, to_config(f));
    if (!out_l.empty()) {
        if (fmt == Format::PgmDir) {
            auto meta = io::read_pgm_stack(input).second;
            io::write_pgm_stack(res.L, meta, out_l, 0.0, 1.0);
        } else {
            save_matrix(out_l, res.L, fmt);
        }
    }
    if (!out_s.empty()) {
        if (fmt == Format::PgmDir) {
            auto meta = io::read_pgm_stack(input).second;
            DenseMatrix abs_s = res.S;
            for (double& v : abs_s.data()) v = std::abs(v);
            io::write_pgm_stack(abs_s, meta, out_s, 0.0, 1.0);
        } else {
            save_matrix(out_s, res.S, fmt);
        }
    }
    if (!report.empty()) {
        write_report(report, res, to_config(f));
    }
    std::cout << "converged=" << (res.report.converged ? "true" : "false")
              << " iters=" << res.report.iters << " lambda=" << res.lambda
              << " final_feas="
              << (res.report.feas.empty() ? 0.0 : res.report.feas.back())
              << " wall_time=" << res.wall_time << "\n";
    return 0;
}

int run_synth(const io::SynthSpec& spec, const std::string& out_x,
              const std::string& out_l0, const std::string& out_s0,
              const std::string& out_labels) {
    auto data = io::synth_generate(spec);
    if (!out_x.empty()) io::write_binary_matrix(out_x, data.x);
    if (!out_l0.empty()) io::write_binary_matrix(out_l0, data.l0);
    if (!out_s0.empty()) io::write_binary_matrix(out_s0, data.s0);
    if (!out_labels.empty()) {
        std::ofstream os(out_labels);
        for (std::size_t j = 0; j < data.assignment.size(); ++j) {
            os << data.assignment.label(j) << '\n';
        }
    }
    std::cout << "wrote synthetic problem d=" << spec.d << " n=" << spec.n
              << " c=" << spec.c << "\n";
    return 0;
}

int run_bench(const std::string& mode, const std::vector<std::size_t>& sizes,
              std::size_t fixed, std::size_t repeats, std::size_t iters,
              std::uint64_t seed, const std::string& out) {
    if (sizes.empty()) {
        std::cerr << "error: empty size list\n";
        return 2;
    }
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        os = &file;
    }
    *os << "mode,d,n,iters,repeats,mean_time,stddev_time\n";
    for (std::size_t size : sizes) {
        const std::size_t d = mode == "d" ? size : fixed;
        const std::size_t n = mode == "d" ? fixed : size;
        io::SynthSpec spec{.d = d, .n = n, .c = 3, .sparsity = 0.05,
                           .magnitude = 1.0, .seed = seed};
        auto data = io::synth_generate(spec);
        SolverConfig cfg;
        cfg.c = 3;
        cfg.fixed_iters = iters;
        cfg.kmeans.seed = seed;
        std::vector<double> times;
        for (std::size_t r = 0; r < repeats; ++r) {
            auto res = solve(data.x, cfg);
            times.push_back(res.wall_time);
        }
        const double mean =
            std::accumulate(times.begin(), times.end(), 0.0) / times.size();
        double var = 0.0;
        for (double t : times) var += (t - mean) * (t - mean);
        const double stddev =
            times.size() > 1 ? std::sqrt(var / (times.size() - 1)) : 0.0;
        *os << mode << ',' << d << ',' << n << ',' << iters << ',' << repeats
            << ',' << mean << ',' << stddev << '\n';
    }
    return 0;
}

int run_outliers(const SolveFlags& f, std::optional<double> threshold) {
    const fs::path input(f.input);
    if (!fs::exists(input)) {
        std::cerr << "error: input does not exist: " << f.input << "\n";
        return 2;
    }
    DenseMatrix x = load_matrix(input, detect_format(input));
    if (f.groups == 0 || f.groups > x.cols()) {
        std::cerr << "error: --groups must be in [1, " << x.cols() << "]\n";
        return 2;
    }
    auto res = solve(x, to_config(f));
    auto scores = io::outlier_scores(res.S, threshold.value_or(0.0));
    if (threshold) {
        std::cout << "# threshold=" << *threshold << "\n";
        for (std::size_t j = 0; j < scores.scores.size(); ++j) {
            const bool flagged = scores.scores[j] >= *threshold;
            std::cout << j << ' ' << scores.scores[j]
                      << (flagged ? " FLAGGED" : "") << '\n';
        }
    } else {
        // no threshold: all scores, largest first
        std::vector<std::size_t> order(scores.scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores.scores[a] > scores.scores[b];
        });
        for (std::size_t j : order) {
            std::cout << j << ' ' << scores.scores[j] << '\n';
        }
    }
    return 0;
}

int run_frames(const std::string& frames_dir, std::size_t groups,
               const std::string& out_bg, const std::string& out_fg,
               const SolveFlags& base) {
    auto [x, meta] = io::read_pgm_stack(fs::path(frames_dir));
    if (groups == 0 || groups > x.cols()) {
        std::cerr << "error: --groups must be in [1, " << x.cols() << "]\n";
        return 2;
    }
    SolveFlags f = base;
    f.groups = groups;
    auto res = solve(x, to_config(f));
    if (!out_bg.empty()) {
        io::write_pgm_stack(res.L, meta, out_bg, 0.0, 1.0, "bg");
    }
    if (!out_fg.empty()) {
        DenseMatrix abs_s = res.S;
        for (double& v : abs_s.data()) v = std::abs(v);
        io::write_pgm_stack(abs_s, meta, out_fg, 0.0, 1.0, "fg");
    }
    std::cout << "converged=" << (res.report.converged ? "true" : "false")
              << " iters=" << res.report.iters << " frames=" << meta.frame_count
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RES-PCA: SVD-free robust PCA (low-rank + sparse decomposition)"};
    app.require_subcommand(1);

    // decompose
    SolveFlags dec;
    std::string out_l, out_s, report;
    auto* decompose = app.add_subcommand("decompose", "decompose X into L + S");
    add_solve_flags(decompose, dec);
    decompose->add_option("--out-l", out_l, "path for the low-rank part");
    decompose->add_option("--out-s", out_s, "path for the sparse part");
    decompose->add_option("--report", report, "JSON-lines convergence report");

    // synth
    io::SynthSpec spec{.d = 100, .n = 200, .c = 3, .sparsity = 0.05,
                       .magnitude = 1.0};
    std::string out_x, out_l0, out_s0, out_labels;
    auto* synth = app.add_subcommand("synth", "generate a synthetic problem");
    synth->add_option("--d", spec.d, "feature dimension");
    synth->add_option("--n", spec.n, "sample count");
    synth->add_option("--c", spec.c, "ground-truth group count");
    synth->add_option("--sparsity", spec.sparsity, "corrupted-entry fraction");
    synth->add_option("--magnitude", spec.magnitude, "corruption scale");
    synth->add_option("--noise-sigma", spec.noise_sigma, "dense noise level");
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--out-x", out_x, "path for X");
    synth->add_option("--out-l0", out_l0, "path for ground-truth L");
    synth->add_option("--out-s0", out_s0, "path for ground-truth S");
    synth->add_option("--out-labels", out_labels, "path for group labels (CSV)");

    // bench
    std::string mode = "n", bench_out;
    std::vector<std::size_t> sizes;
    std::size_t fixed = 500, repeats = 10, bench_iters = 30;
    std::uint64_t bench_seed = 0;
    auto* bench = app.add_subcommand("bench", "time solves across problem sizes");
    bench->add_option("--mode", mode, "sweep dimension: n or d")
        ->check(CLI::IsMember({"n", "d"}));
    bench->add_option("--sizes", sizes, "sizes to sweep")->delimiter(',');
    bench->add_option("--fixed", fixed, "value of the non-swept dimension");
    bench->add_option("--repeats", repeats, "solves per size");
    bench->add_option("--iters", bench_iters, "fixed iteration count");
    bench->add_option("--seed", bench_seed, "generator seed");
    bench->add_option("--out", bench_out, "CSV output path (default stdout)");

    // outliers
    SolveFlags outf;
    std::optional<double> threshold;
    auto* outliers = app.add_subcommand("outliers", "score columns by ||S_j||_2");
    add_solve_flags(outliers, outf);
    outliers->add_option("--threshold", threshold, "flagging threshold");

    // frames
    std::string frames_dir, out_bg, out_fg;
    std::size_t frame_groups = 1;
    SolveFlags framef;
    auto* frames =
        app.add_subcommand("frames", "background/foreground separation on PGM frames");
    frames->add_option("--frames", frames_dir, "directory of PGM frames")->required();
    frames->add_option("--groups", frame_groups, "number of backgrounds")->required();
    frames->add_option("--out-bg", out_bg, "background output directory");
    frames->add_option("--out-fg", out_fg, "foreground output directory");
    frames->add_option("--lambda", framef.lambda, "balancing parameter or 'auto'");
    frames->add_option("--seed", framef.seed, "clustering seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (decompose->parsed()) return run_decompose(dec, out_l, out_s, report);
        if (synth->parsed()) return run_synth(spec, out_x, out_l0, out_s0, out_labels);
        if (bench->parsed())
            return run_bench(mode, sizes, fixed, repeats, bench_iters, bench_seed,
                             bench_out);
        if (outliers->parsed()) return run_outliers(outf, threshold);
        if (frames->parsed())
            return run_frames(frames_dir, frame_groups, out_bg, out_fg, framef);
    } catch (const io::IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
