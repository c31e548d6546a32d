#include "respca/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace respca::io {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'S', 'P', 'C', 'A', '1', '\0'};

void put_u64le(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t get_u64le(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) {
        throw TruncatedFile("binary matrix: truncated header");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

// Skips PGM whitespace and '#' comments.
void skip_pgm_space(std::istream& is) {
    int ch;
    while ((ch = is.peek()) != EOF) {
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
}

std::size_t read_pgm_uint(std::istream& is, const std::string& what) {
    skip_pgm_space(is);
    std::size_t v;
    if (!(is >> v)) throw BadFormat("pgm: cannot parse " + what);
    return v;
}

std::vector<unsigned char> read_pgm_frame(const std::filesystem::path& path,
                                          std::size_t& height, std::size_t& width) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char p, five;
    is.get(p);
    is.get(five);
    if (!is || p != 'P' || five != '5') {
        throw BadFormat("pgm: not a binary P5 file: " + path.string());
    }
    width = read_pgm_uint(is, "width");
    height = read_pgm_uint(is, "height");
    const std::size_t maxval = read_pgm_uint(is, "maxval");
    if (maxval != 255) {
        throw BadFormat("pgm: maxval must be 255 in " + path.string());
    }
    is.get();  // single whitespace separating header and raster
    std::vector<unsigned char> pixels(width * height);
    if (!is.read(reinterpret_cast<char*>(pixels.data()),
                 static_cast<std::streamsize>(pixels.size()))) {
        throw TruncatedFile("pgm: truncated raster in " + path.string());
    }
    return pixels;
}

}  // namespace

DenseMatrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            double v;
            const auto [end, ec] =
                std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || end != cell.data() + cell.size()) {
                throw ParseError("csv: non-numeric cell '" + cell + "' at line " +
                                 std::to_string(lineno));
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw RaggedRow("csv: ragged row at line " + std::to_string(lineno));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw BadFormat("csv: empty file " + path.string());
    DenseMatrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

void write_csv_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    char buf[40];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            os << buf;
            if (c + 1 < m.cols()) os << ',';
        }
        os << '\n';
    }
}

DenseMatrix read_binary_matrix(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8)) throw TruncatedFile("binary matrix: file too short");
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw BadMagic("binary matrix: bad magic in " + path.string());
    }
    const std::uint64_t rows = get_u64le(is);
    const std::uint64_t cols = get_u64le(is);
    std::vector<double> data(rows * cols);
    if (!is.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)))) {
        throw TruncatedFile("binary matrix: truncated payload in " + path.string());
    }
    return DenseMatrix(rows, cols, std::move(data));
}

void write_binary_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kMagic, 8);
    put_u64le(os, m.rows());
    put_u64le(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data().data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

std::pair<DenseMatrix, FrameStackMeta> read_pgm_stack(
    const std::vector<std::filesystem::path>& files) {
    if (files.empty()) throw BadFormat("pgm stack: no frames");
    FrameStackMeta meta;
    meta.sources = files;
    meta.frame_count = files.size();
    DenseMatrix m;
    for (std::size_t f = 0; f < files.size(); ++f) {
        std::size_t h, w;
        const auto pixels = read_pgm_frame(files[f], h, w);
        if (f == 0) {
            meta.frame_height = h;
            meta.frame_width = w;
            m = DenseMatrix(h * w, files.size());
        } else if (h != meta.frame_height || w != meta.frame_width) {
            throw DimensionMismatch("pgm stack: frame " + files[f].string() +
                                    " has different dimensions");
        }
        auto dst = m.col(f);
        for (std::size_t k = 0; k < pixels.size(); ++k) {
            dst[k] = pixels[k] / 255.0;
        }
    }
    return {std::move(m), std::move(meta)};
}

std::pair<DenseMatrix, FrameStackMeta> read_pgm_stack(
    const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return read_pgm_stack(files);
}

void write_pgm_stack(const DenseMatrix& m, const FrameStackMeta& meta,
                     const std::filesystem::path& dir, double lo, double hi,
                     const std::string& prefix) {
    if (m.rows() != meta.frame_height * meta.frame_width) {
        throw DimensionMismatch("pgm stack: matrix rows != height*width");
    }
    if (hi <= lo) throw BadFormat("pgm stack: clamp range must have hi > lo");
    std::filesystem::create_directories(dir);
    const double scale = 255.0 / (hi - lo);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%05zu.pgm", prefix.c_str(), j);
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw IoError("cannot open " + (dir / name).string());
        os << "P5\n" << meta.frame_width << " " << meta.frame_height << "\n255\n";
        auto src = m.col(j);
        std::vector<unsigned char> pixels(src.size());
        for (std::size_t k = 0; k < src.size(); ++k) {
            const double t = (src[k] - lo) * scale;
            // lround rounds half away from zero: 127.5 -> 128
            const long q = std::lround(std::clamp(t, 0.0, 255.0));
            pixels[k] = static_cast<unsigned char>(q);
        }
        os.write(reinterpret_cast<const char*>(pixels.data()),
                 static_cast<std::streamsize>(pixels.size()));
    }
}

SynthData synth_generate(const SynthSpec& spec) {
    if (spec.d == 0 || spec.n == 0) {
        throw std::invalid_argument("synth_generate: dimensions must be >= 1");
    }
    if (spec.c == 0 || spec.c > spec.n) {
        throw std::invalid_argument("synth_generate: need 1 <= c <= n");
    }
    if (spec.sparsity < 0.0 || spec.sparsity >= 1.0) {
        throw std::invalid_argument("synth_generate: sparsity must be in [0,1)");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Near-equal group sizes, contiguous blocks of columns.
    std::vector<std::size_t> labels(spec.n);
    const std::size_t base = spec.n / spec.c;
    const std::size_t rem = spec.n % spec.c;
    std::size_t col = 0;
    for (std::size_t g = 0; g < spec.c; ++g) {
        const std::size_t sz = base + (g < rem ? 1 : 0);
        for (std::size_t k = 0; k < sz; ++k) labels[col++] = g;
    }

    DenseMatrix l0(spec.d, spec.n);
    std::vector<std::vector<double>> bases(spec.c, std::vector<double>(spec.d));
    for (auto& u : bases) {
        for (double& v : u) v = unit(rng);
    }
    for (std::size_t j = 0; j < spec.n; ++j) {
        auto dst = l0.col(j);
        const auto& u = bases[labels[j]];
        std::copy(u.begin(), u.end(), dst.begin());
    }

    DenseMatrix s0(spec.d, spec.n);
    const auto nnz = static_cast<std::size_t>(
        std::llround(spec.sparsity * static_cast<double>(spec.d * spec.n)));
    std::vector<std::size_t> positions(spec.d * spec.n);
    for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = k;
    std::uniform_real_distribution<double> mag(spec.magnitude / 2.0, spec.magnitude);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, positions.size() - 1);
        std::swap(positions[k], positions[pick(rng)]);
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        s0.data()[positions[k]] = sign * mag(rng);
    }

    DenseMatrix x(spec.d, spec.n);
    for (std::size_t k = 0; k < x.size(); ++k) {
        x.data()[k] = l0.data()[k] + s0.data()[k];
    }
    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (double& v : x.data()) v += noise(rng);
    }

    SynthData out;
    out.x = std::move(x);
    out.l0 = std::move(l0);
    out.s0 = std::move(s0);
    out.assignment = GroupAssignment(std::move(labels), spec.c);
    return out;
}

OutlierScores outlier_scores(const DenseMatrix& s, double threshold) {
    if (threshold < 0.0) {
        throw std::invalid_argument("outlier_scores: negative threshold");
    }
    OutlierScores out;
    out.scores = column_l2_norms(s);
    for (std::size_t j = 0; j < out.scores.size(); ++j) {
        if (out.scores[j] >= threshold) out.flagged.push_back(j);
    }
    return out;
}

}  // namespace respca::io
