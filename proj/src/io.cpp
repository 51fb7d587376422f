#include "varsel/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace varsel {

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ValidationError("error writing " + path);
}

std::vector<std::string> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        std::string_view field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
        while (!field.empty() && (field.front() == ' ')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ')) field.remove_suffix(1);
        out.emplace_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

namespace {

std::vector<std::pair<std::size_t, std::string_view>> nonblank_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++lineno;
        if (line.find_first_not_of(" \t") != std::string_view::npos) lines.emplace_back(lineno, line);
        start = end + 1;
    }
    return lines;
}

}  // namespace

LabeledMatrix parse_matrix(std::string_view text, const LoadOptions &opts) {
    const auto lines = nonblank_lines(text);
    LabeledMatrix out;
    if (lines.empty()) return out;

    char delim = opts.delimiter;
    if (delim == 0) delim = lines.front().second.find('\t') != std::string_view::npos ? '\t' : ',';

    const std::vector<std::string> first = split_fields(lines.front().second, delim);
    bool header = false;
    if (opts.header) {
        header = *opts.header;
    } else {
        for (const auto &f : first)
            if (!parse_number(f)) header = true;
    }
    const std::size_t ncols = first.size();
    const std::size_t body_start = header ? 1 : 0;
    const auto nrows = static_cast<Eigen::Index>(lines.size() - body_start);

    // Row-major ingestion, then one transpose into Eigen's layout.
    std::vector<double> buffer;
    buffer.reserve(static_cast<std::size_t>(nrows) * ncols);
    for (std::size_t r = body_start; r < lines.size(); ++r) {
        const auto [lineno, line] = lines[r];
        const std::vector<std::string> fields = split_fields(line, delim);
        if (fields.size() != ncols)
            throw ValidationError("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(ncols) + " fields");
        for (std::size_t c = 0; c < ncols; ++c) {
            const auto v = parse_number(fields[c]);
            if (!v)
                throw ValidationError("line " + std::to_string(lineno) + ", column " +
                                      std::to_string(c + 1) + ": non-numeric value '" +
                                      fields[c] + "'");
            buffer.push_back(*v);
        }
    }
    out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(
        buffer.data(), nrows, static_cast<Eigen::Index>(ncols));
    if (header) {
        out.names = first;
    } else {
        for (std::size_t c = 0; c < ncols; ++c) out.names.push_back("X" + std::to_string(c + 1));
    }
    return out;
}

LabeledMatrix load_matrix(const std::string &path, const LoadOptions &opts) {
    try {
        return parse_matrix(read_file(path), opts);
    } catch (const ValidationError &e) {
        throw ValidationError(path + ": " + e.what());
    }
}

// Archive layout: "VARSELAR", u32 version, u64 block count, then blocks of
// (u32 name length, name, u8 type, u64 rows, u64 cols, payload). All
// integers and doubles are little-endian; matrices are column-major.
namespace {

constexpr char kMagic[8] = {'V', 'A', 'R', 'S', 'E', 'L', 'A', 'R'};

enum BlockType : std::uint8_t { f64_block = 1, i64_block = 2, str_block = 3, strlist_block = 4 };

struct Block {
    BlockType type = f64_block;
    std::uint64_t rows = 0, cols = 0;
    std::vector<double> f64;
    std::vector<std::int64_t> i64;
    std::vector<std::string> strings;
};

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void bytes(std::string_view s) { buf_.append(s); }

    void f64(const std::string &name, const Eigen::MatrixXd &M) {
        header(name, f64_block, static_cast<std::uint64_t>(M.rows()),
               static_cast<std::uint64_t>(M.cols()));
        for (Eigen::Index k = 0; k < M.size(); ++k) u64(std::bit_cast<std::uint64_t>(M.data()[k]));
    }
    void i64(const std::string &name, const std::vector<std::int64_t> &v) {
        header(name, i64_block, v.size(), 1);
        for (const auto x : v) u64(static_cast<std::uint64_t>(x));
    }
    void str(const std::string &name, const std::string &s) {
        header(name, str_block, s.size(), 1);
        bytes(s);
    }
    void strlist(const std::string &name, const std::vector<std::string> &v) {
        header(name, strlist_block, v.size(), 1);
        for (const auto &s : v) {
            u64(s.size());
            bytes(s);
        }
    }

    std::string finish() const {
        Writer out;
        out.bytes(std::string_view(kMagic, sizeof(kMagic)));
        out.u32(static_cast<std::uint32_t>(FitArchive::kFormatVersion));
        out.u64(count_);
        out.bytes(buf_);
        return out.buf_;
    }

private:
    void header(const std::string &name, BlockType t, std::uint64_t rows, std::uint64_t cols) {
        u32(static_cast<std::uint32_t>(name.size()));
        bytes(name);
        u8(t);
        u64(rows);
        u64(cols);
        ++count_;
    }

    std::string buf_;
    std::uint64_t count_ = 0;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(u8()) << (8 * k);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(u8()) << (8 * k);
        return v;
    }
    std::string bytes(std::uint64_t len) {
        need(len);
        std::string s(data_.substr(pos_, len));
        pos_ += len;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }
    std::uint64_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::uint64_t len) const {
        if (len > data_.size() - pos_) throw ValidationError("corrupt archive: truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

[[noreturn]] void corrupt(const std::string &why) {
    throw ValidationError("corrupt archive: " + why);
}

class BlockMap {
public:
    explicit BlockMap(std::map<std::string, Block> blocks) : blocks_(std::move(blocks)) {}

    bool has(const std::string &name) const { return blocks_.count(name) > 0; }

    const Block &get(const std::string &name, BlockType t) const {
        const auto it = blocks_.find(name);
        if (it == blocks_.end()) corrupt("missing block '" + name + "'");
        if (it->second.type != t) corrupt("block '" + name + "' has the wrong type");
        return it->second;
    }
    Eigen::MatrixXd matrix(const std::string &name, Eigen::Index rows, Eigen::Index cols) const {
        const Block &b = get(name, f64_block);
        if (static_cast<Eigen::Index>(b.rows) != rows || static_cast<Eigen::Index>(b.cols) != cols)
            corrupt("block '" + name + "' has the wrong shape");
        return Eigen::Map<const Eigen::MatrixXd>(b.f64.data(), rows, cols);
    }
    Eigen::MatrixXd matrix_any(const std::string &name) const {
        const Block &b = get(name, f64_block);
        return Eigen::Map<const Eigen::MatrixXd>(b.f64.data(), static_cast<Eigen::Index>(b.rows),
                                                 static_cast<Eigen::Index>(b.cols));
    }
    Eigen::VectorXd vector(const std::string &name, Eigen::Index len) const {
        return matrix(name, len, 1);
    }
    std::vector<std::int64_t> ints(const std::string &name, std::size_t len) const {
        const Block &b = get(name, i64_block);
        if (b.i64.size() != len) corrupt("block '" + name + "' has the wrong length");
        return b.i64;
    }
    std::int64_t scalar(const std::string &name) const { return ints(name, 1).front(); }
    const std::string &str(const std::string &name) const {
        return get(name, str_block).strings.front();
    }
    const std::vector<std::string> &strlist(const std::string &name) const {
        return get(name, strlist_block).strings;
    }

private:
    std::map<std::string, Block> blocks_;
};

}  // namespace

std::string serialize_archive(const FitArchive &a) {
    const ModelFit &f = a.fit;
    const GridFit &g = f.grid;
    Writer w;
    w.str("dataset_digest", f.dataset_digest);
    w.str("design_digest", a.design_digest);
    w.str("family", to_string(f.family));
    w.str("options", a.options_json);
    w.i64("n", {a.n});
    w.i64("m", {a.m});
    w.i64("fitted", {a.fitted_sigma, a.fitted_sa, a.fitted_eta});
    w.strlist("variable_names", a.variable_names);

    if (a.grid.sigma) w.f64("grid.sigma", *a.grid.sigma);
    if (a.grid.sa) w.f64("grid.sa", *a.grid.sa);
    w.f64("grid.logodds", a.grid.logodds);

    w.f64("logw", g.logw);
    w.f64("sigma_hat", g.sigma_hat);
    w.f64("sa_hat", g.sa_hat);
    w.f64("alpha", g.alpha_matrix());
    w.f64("mu", g.mu_matrix());
    w.f64("s2", g.s2_matrix());
    if (f.family == Family::binomial) {
        Eigen::MatrixXd eta(a.n, g.size());
        for (Eigen::Index j = 0; j < g.size(); ++j)
            eta.col(j) = g.states[static_cast<std::size_t>(j)].eta;
        w.f64("eta", eta);
    }
    w.f64("mu_cov", g.mu_cov);
    std::vector<std::int64_t> conv, iters;
    for (const bool c : g.converged) conv.push_back(c ? 1 : 0);
    for (const int k : g.n_iter) iters.push_back(k);
    w.i64("converged", conv);
    w.i64("n_iter", iters);

    w.f64("w", f.w);
    w.f64("pip", f.pip);
    w.f64("beta_mean", f.beta_mean);
    if (f.pve) w.f64("pve", *f.pve);
    if (f.model_pve_samples) w.f64("model_pve_samples", *f.model_pve_samples);
    return w.finish();
}

FitArchive deserialize_archive(std::string_view bytes) {
    Reader r(bytes);
    if (r.remaining() < sizeof(kMagic) || r.bytes(sizeof(kMagic)) != std::string(kMagic, 8))
        corrupt("not a varsel archive");
    const std::uint32_t version = r.u32();
    if (version != FitArchive::kFormatVersion)
        corrupt("unsupported format version " + std::to_string(version));
    const std::uint64_t count = r.u64();
    std::map<std::string, Block> blocks;
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::uint32_t name_len = r.u32();
        std::string name = r.bytes(name_len);
        Block b;
        const std::uint8_t type = r.u8();
        if (type < f64_block || type > strlist_block) corrupt("unknown block type");
        b.type = static_cast<BlockType>(type);
        b.rows = r.u64();
        b.cols = r.u64();
        switch (b.type) {
        case f64_block: {
            if (b.cols != 0 && b.rows > r.remaining() / 8 / b.cols) corrupt("truncated");
            b.f64.resize(b.rows * b.cols);
            for (auto &x : b.f64) x = std::bit_cast<double>(r.u64());
            break;
        }
        case i64_block:
            if (b.rows > r.remaining() / 8) corrupt("truncated");
            b.i64.resize(b.rows);
            for (auto &x : b.i64) x = static_cast<std::int64_t>(r.u64());
            break;
        case str_block:
            b.strings.push_back(r.bytes(b.rows));
            break;
        case strlist_block:
            if (b.rows > r.remaining() / 8) corrupt("truncated");
            for (std::uint64_t s = 0; s < b.rows; ++s) b.strings.push_back(r.bytes(r.u64()));
            break;
        }
        if (!blocks.emplace(std::move(name), std::move(b)).second) corrupt("duplicate block");
    }
    if (!r.done()) corrupt("trailing bytes");

    const BlockMap bm(std::move(blocks));
    FitArchive a;
    a.format_version = version;
    ModelFit &f = a.fit;
    f.dataset_digest = bm.str("dataset_digest");
    a.design_digest = bm.str("design_digest");
    try {
        f.family = family_from_string(bm.str("family"));
    } catch (const std::exception &) {
        corrupt("unknown family");
    }
    a.options_json = bm.str("options");
    a.n = bm.scalar("n");
    a.m = bm.scalar("m");
    const auto fitted = bm.ints("fitted", 3);
    a.fitted_sigma = fitted[0] != 0;
    a.fitted_sa = fitted[1] != 0;
    a.fitted_eta = fitted[2] != 0;
    a.variable_names = bm.strlist("variable_names");
    const auto p = static_cast<Eigen::Index>(a.variable_names.size());

    a.grid.logodds = bm.matrix_any("grid.logodds");
    const Eigen::Index ns = a.grid.logodds.cols();
    if (a.grid.logodds.rows() != 1 && a.grid.logodds.rows() != p) corrupt("bad logodds shape");
    if (bm.has("grid.sigma")) a.grid.sigma = bm.vector("grid.sigma", ns);
    if (bm.has("grid.sa")) a.grid.sa = bm.vector("grid.sa", ns);
    if (a.n < 0 || a.m < 1) corrupt("bad dimensions");

    GridFit &g = f.grid;
    g.logw = bm.vector("logw", ns);
    g.sigma_hat = bm.vector("sigma_hat", ns);
    g.sa_hat = bm.vector("sa_hat", ns);
    const Eigen::MatrixXd alpha = bm.matrix("alpha", p, ns);
    const Eigen::MatrixXd mu = bm.matrix("mu", p, ns);
    const Eigen::MatrixXd s2 = bm.matrix("s2", p, ns);
    Eigen::MatrixXd eta;
    if (f.family == Family::binomial) eta = bm.matrix("eta", a.n, ns);
    g.states.resize(static_cast<std::size_t>(ns));
    for (Eigen::Index j = 0; j < ns; ++j) {
        VariationalState &q = g.states[static_cast<std::size_t>(j)];
        q.alpha = alpha.col(j);
        q.mu = mu.col(j);
        q.s2 = s2.col(j);
        if (f.family == Family::binomial) q.eta = eta.col(j);
    }
    g.mu_cov = bm.matrix("mu_cov", a.m, ns);
    for (const auto c : bm.ints("converged", static_cast<std::size_t>(ns)))
        g.converged.push_back(c != 0);
    for (const auto k : bm.ints("n_iter", static_cast<std::size_t>(ns)))
        g.n_iter.push_back(static_cast<int>(k));

    f.w = bm.vector("w", ns);
    f.pip = bm.vector("pip", p);
    f.beta_mean = bm.vector("beta_mean", p);
    if (bm.has("pve")) f.pve = bm.matrix("pve", p, ns);
    if (bm.has("model_pve_samples")) f.model_pve_samples = bm.matrix_any("model_pve_samples").col(0);
    return a;
}

void save_archive(const FitArchive &archive, const std::string &path) {
    write_file(path, serialize_archive(archive));
}

FitArchive load_archive(const std::string &path) {
    try {
        return deserialize_archive(read_file(path));
    } catch (const ValidationError &e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace varsel
