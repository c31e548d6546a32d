// End-to-end tests of the respca command-line tool. Each case drives the
// built binary through std::system and inspects files and exit codes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "respca/io.hpp"
#include "test_util.hpp"

using namespace respca;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("respca_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& capture = {}) {
    std::string cmd = std::string(RESPCA_CLI_PATH) + " " + args;
    if (!capture.empty()) {
        cmd += " > " + capture.string() + " 2>&1";
    } else {
        cmd += " > /dev/null 2>&1";
    }
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

json last_json_line(const fs::path& p) {
    std::ifstream is(p);
    std::string line, last;
    while (std::getline(is, line)) {
        if (!line.empty()) last = line;
    }
    return json::parse(last);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("synth writes a reloadable ground-truth problem") {
    TempDir tmp;
    const auto x = tmp.path / "x.bin";
    const auto l0 = tmp.path / "l0.bin";
    const auto s0 = tmp.path / "s0.bin";
    REQUIRE(run("synth --d 50 --n 120 --c 3 --sparsity 0.05 --seed 7 --out-x " +
                x.string() + " --out-l0 " + l0.string() + " --out-s0 " +
                s0.string()) == 0);
    auto mx = io::read_binary_matrix(x);
    auto ml = io::read_binary_matrix(l0);
    auto ms = io::read_binary_matrix(s0);
    std::size_t nnz = 0;
    for (double v : ms.data()) nnz += v != 0.0;
    CHECK(nnz == 300);
    for (std::size_t k = 0; k < mx.size(); ++k) {
        CHECK(mx.data()[k] == ml.data()[k] + ms.data()[k]);
    }
}

TEST_CASE("synth rejects c > n") {
    CHECK(run("synth --c 5 --n 3 --d 4") == 2);
}

TEST_CASE("decompose solves a synthetic problem end to end") {
    TempDir tmp;
    const auto x = tmp.path / "x.bin";
    REQUIRE(run("synth --d 60 --n 150 --c 3 --sparsity 0.05 --seed 3 --out-x " +
                x.string()) == 0);
    const auto out_l = tmp.path / "l.bin";
    const auto out_s = tmp.path / "s.bin";
    const auto report = tmp.path / "report.jsonl";
    REQUIRE(run("decompose --input " + x.string() +
                " --groups 3 --out-l " + out_l.string() + " --out-s " +
                out_s.string() + " --report " + report.string()) == 0);

    const json summary = last_json_line(report);
    CHECK(summary["converged"] == true);
    CHECK(summary["iters"].get<int>() >= 23);
    CHECK(summary["iters"].get<int>() <= 28);

    // reload(L) + reload(S) ~ X
    auto mx = io::read_binary_matrix(x);
    auto ml = io::read_binary_matrix(out_l);
    auto ms = io::read_binary_matrix(out_s);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mx.size(); ++k) {
        const double d = mx.data()[k] - ml.data()[k] - ms.data()[k];
        num += d * d;
        den += mx.data()[k] * mx.data()[k];
    }
    CHECK(std::sqrt(num / den) <= 2e-3);
}

TEST_CASE("decompose usage errors") {
    TempDir tmp;
    const auto x = tmp.path / "x.csv";
    io::write_csv_matrix(x, DenseMatrix(3, 4));
    CHECK(run("decompose --input " + x.string() + " --groups 0") == 2);
    CHECK(run("decompose --input " + tmp.path.string() + "/missing.csv --groups 1") == 2);
    CHECK(run("decompose --groups 1") == 2);  // missing --input
}

TEST_CASE("decompose echoes the resolved auto lambda") {
    TempDir tmp;
    std::mt19937_64 rng(5);
    const auto x = tmp.path / "x.csv";
    io::write_csv_matrix(x, testutil::random_matrix(rng, 100, 200, 0.0, 1.0));
    const auto report = tmp.path / "report.jsonl";
    REQUIRE(run("decompose --input " + x.string() + " --groups 2 --lambda auto "
                "--max-iter 5 --report " + report.string()) == 0);
    const json summary = last_json_line(report);
    CHECK(summary["lambda"].get<double>() ==
          doctest::Approx(std::sqrt(200.0)).epsilon(1e-4));
}

TEST_CASE("outliers flags corrupted columns") {
    TempDir tmp;
    // 28 identical columns plus 2 strong outlier columns
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DenseMatrix m(30, 30);
    std::vector<double> base(30);
    for (double& v : base) v = u(rng);
    for (std::size_t j = 0; j < 30; ++j) {
        auto col = m.col(j);
        if (j == 10 || j == 20) {
            for (double& v : col) v = 10.0 * u(rng);
        } else {
            std::copy(base.begin(), base.end(), col.begin());
        }
    }
    const auto x = tmp.path / "x.csv";
    io::write_csv_matrix(x, m);
    const auto out = tmp.path / "out.txt";
    REQUIRE(run("outliers --input " + x.string() + " --groups 1 --threshold 5",
                out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("# threshold=5") != std::string::npos);
    CHECK(text.find("10 ") != std::string::npos);
    std::size_t flags = 0, pos = 0;
    while ((pos = text.find("FLAGGED", pos)) != std::string::npos) {
        ++flags;
        pos += 7;
    }
    CHECK(flags == 2);
}

TEST_CASE("frames separates a static scene") {
    TempDir tmp;
    // 10 identical frames
    std::mt19937_64 rng(7);
    auto scene = testutil::random_matrix(rng, 64, 1, 0.1, 0.9);
    DenseMatrix stack(64, 10);
    for (std::size_t j = 0; j < 10; ++j) {
        auto col = stack.col(j);
        std::copy(scene.col(0).begin(), scene.col(0).end(), col.begin());
    }
    io::FrameStackMeta meta{.frame_height = 8, .frame_width = 8, .frame_count = 10};
    const auto in_dir = tmp.path / "frames";
    io::write_pgm_stack(stack, meta, in_dir, 0.0, 1.0);

    const auto bg = tmp.path / "bg";
    const auto fg = tmp.path / "fg";
    REQUIRE(run("frames --frames " + in_dir.string() + " --groups 1 --out-bg " +
                bg.string() + " --out-fg " + fg.string()) == 0);

    auto [bg_m, bg_meta] = io::read_pgm_stack(bg);
    auto [fg_m, fg_meta] = io::read_pgm_stack(fg);
    auto [in_m, in_meta] = io::read_pgm_stack(in_dir);
    REQUIRE(bg_m.same_shape(in_m));
    for (std::size_t k = 0; k < in_m.size(); ++k) {
        CHECK(std::abs(bg_m.data()[k] - in_m.data()[k]) <= 2.0 / 255.0);
        CHECK(fg_m.data()[k] <= 2.0 / 255.0);
    }
}

TEST_CASE("frames extracts a moving bright square") {
    TempDir tmp;
    const std::size_t h = 16, w = 16, n = 20;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 0.4);
    std::vector<double> background(h * w);
    for (double& v : background) v = u(rng);

    DenseMatrix stack(h * w, n);
    std::vector<std::size_t> square_x(n);
    for (std::size_t f = 0; f < n; ++f) {
        auto col = stack.col(f);
        std::copy(background.begin(), background.end(), col.begin());
        square_x[f] = f % (w - 4);
        for (std::size_t y = 6; y < 10; ++y) {
            for (std::size_t x = square_x[f]; x < square_x[f] + 4; ++x) {
                col[y * w + x] = 1.0;
            }
        }
    }
    io::FrameStackMeta meta{.frame_height = h, .frame_width = w, .frame_count = n};
    const auto in_dir = tmp.path / "frames";
    io::write_pgm_stack(stack, meta, in_dir, 0.0, 1.0);

    const auto fg = tmp.path / "fg";
    REQUIRE(run("frames --frames " + in_dir.string() + " --groups 1 --out-fg " +
                fg.string()) == 0);
    auto [fg_m, fg_meta] = io::read_pgm_stack(fg);
    for (std::size_t f = 0; f < n; ++f) {
        auto col = fg_m.col(f);
        for (std::size_t y = 6; y < 10; ++y) {
            for (std::size_t x = square_x[f]; x < square_x[f] + 4; ++x) {
                CHECK(col[y * w + x] > 128.0 / 255.0);
            }
        }
    }
}

TEST_CASE("frames handles two alternating backgrounds with c=2") {
    TempDir tmp;
    const std::size_t h = 12, w = 12, n = 24;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    std::vector<std::vector<double>> backgrounds(2, std::vector<double>(h * w));
    for (auto& bg : backgrounds) {
        for (double& v : bg) v = u(rng);
    }
    DenseMatrix stack(h * w, n);
    for (std::size_t f = 0; f < n; ++f) {
        auto col = stack.col(f);
        const auto& bg = backgrounds[(f / 6) % 2];  // switch every 6 frames
        std::copy(bg.begin(), bg.end(), col.begin());
    }
    io::FrameStackMeta meta{.frame_height = h, .frame_width = w, .frame_count = n};
    const auto in_dir = tmp.path / "frames";
    io::write_pgm_stack(stack, meta, in_dir, 0.0, 1.0);

    const auto bg_dir = tmp.path / "bg";
    REQUIRE(run("frames --frames " + in_dir.string() + " --groups 2 --out-bg " +
                bg_dir.string()) == 0);
    auto [bg_m, bg_meta] = io::read_pgm_stack(bg_dir);
    for (std::size_t f = 0; f < n; ++f) {
        const auto& truth = backgrounds[(f / 6) % 2];
        std::size_t close = 0;
        for (std::size_t k = 0; k < h * w; ++k) {
            close += std::abs(bg_m(k, f) - truth[k]) <= 5.0 / 255.0;
        }
        CHECK(close >= static_cast<std::size_t>(0.99 * h * w));
    }
}

TEST_CASE("bench emits one record per size") {
    TempDir tmp;
    const auto out = tmp.path / "bench.csv";
    REQUIRE(run("bench --mode n --sizes 60,120 --fixed 40 --repeats 1 --iters 5 "
                "--out " + out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("mode,d,n,iters,repeats,mean_time,stddev_time") == 0);
    CHECK(text.find("n,40,60,5,1,") != std::string::npos);
    CHECK(text.find("n,40,120,5,1,") != std::string::npos);
    // single repeat reports zero spread
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        CHECK(line.substr(line.rfind(',') + 1) == "0");
    }
    CHECK(run("bench --mode n --sizes \"\"") == 2);
}
