#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fogswitch/predictors.hpp"

// binary model format: magic "FSM1", version byte, kind byte, then one
// length-prefixed section per field in a fixed per-kind order. all integers
// little-endian; doubles as IEEE-754 bit patterns, so round trips are
// bit-exact. full layout in docs/model-format.md.

namespace fogswitch {

namespace {

struct Writer {
    std::string buf;

    void u8(std::uint8_t v) { buf.push_back(char(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void i32(std::int32_t v) { u32(std::uint32_t(v)); }

    // a field = u32 byte length + payload
    void section(const std::string& payload) {
        u32(std::uint32_t(payload.size()));
        buf += payload;
    }
};

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    explicit Reader(const std::string& b) : buf(b) {}

    void need(std::size_t bytes) {
        if (pos + bytes > buf.size())
            throw fog_error(errc::schema_mismatch, "model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return std::uint8_t(buf[pos++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::int32_t i32() { return std::int32_t(u32()); }
};

std::string enc_vec(const std::vector<double>& v) {
    Writer w;
    w.u32(std::uint32_t(v.size()));
    for (double x : v) w.f64(x);
    return w.buf;
}

std::string enc_matrix(const Rows& m) {
    Writer w;
    w.u32(std::uint32_t(m.size()));
    w.u32(std::uint32_t(m.empty() ? 0 : m.front().size()));
    for (const auto& row : m)
        for (double x : row) w.f64(x);
    return w.buf;
}

std::string enc_f64(double v) {
    Writer w;
    w.f64(v);
    return w.buf;
}

// pulls the next length-prefixed field off the stream
struct FieldReader {
    Reader& r;

    std::string take() {
        std::uint32_t len = r.u32();
        r.need(len);
        std::string out = r.buf.substr(r.pos, len);
        r.pos += len;
        return out;
    }
};

std::vector<double> dec_vec(const std::string& bytes) {
    Reader r(bytes);
    std::uint32_t count = r.u32();
    if (bytes.size() != 4 + std::size_t(count) * 8)
        throw fog_error(errc::schema_mismatch, "vector section length mismatch");
    std::vector<double> v(count);
    for (auto& x : v) x = r.f64();
    return v;
}

Rows dec_matrix(const std::string& bytes) {
    Reader r(bytes);
    std::uint32_t rows = r.u32(), cols = r.u32();
    if (bytes.size() != 8 + std::size_t(rows) * cols * 8)
        throw fog_error(errc::schema_mismatch, "matrix section length mismatch");
    Rows m(rows, std::vector<double>(cols));
    for (auto& row : m)
        for (auto& x : row) x = r.f64();
    return m;
}

double dec_f64(const std::string& bytes) {
    if (bytes.size() != 8)
        throw fog_error(errc::schema_mismatch, "scalar section length mismatch");
    return Reader(bytes).f64();
}

constexpr char kMagic[4] = {'F', 'S', 'M', '1'};
constexpr std::uint8_t kVersion = 1;

std::uint8_t kind_byte(RegressorKind k) {
    switch (k) {
        case RegressorKind::Knn: return 0;
        case RegressorKind::Svr: return 1;
        case RegressorKind::DecisionTree: return 2;
        case RegressorKind::NeuralNet: return 3;
    }
    return 0xff;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    Writer w;
    w.buf.append(kMagic, 4);
    w.u8(kVersion);
    w.u8(kind_byte(model.kind));
    w.section(enc_vec(model.standardizer.means));
    w.section(enc_vec(model.standardizer.stdevs));

    switch (model.kind) {
        case RegressorKind::Knn: {
            const auto& p = std::get<KnnPayload>(model.payload);
            Writer f;
            f.u32(std::uint32_t(p.neighbors));
            w.section(f.buf);
            w.section(enc_matrix(p.X));
            w.section(enc_vec(p.y));
            break;
        }
        case RegressorKind::Svr: {
            const auto& p = std::get<SvrPayload>(model.payload);
            w.section(enc_matrix(p.support_x));
            w.section(enc_vec(p.dual_coef));
            w.section(enc_f64(p.bias));
            w.section(enc_f64(p.gamma));
            w.section(enc_f64(p.C));
            w.section(enc_f64(p.epsilon));
            w.section(enc_f64(p.entry_variance));
            Writer f;
            f.u8(p.converged ? 1 : 0);
            w.section(f.buf);
            break;
        }
        case RegressorKind::DecisionTree: {
            const auto& p = std::get<TreePayload>(model.payload);
            Writer f;
            f.u32(std::uint32_t(p.nodes.size()));
            for (const auto& nd : p.nodes) {
                f.i32(nd.feature);
                f.f64(nd.threshold);
                f.i32(nd.left);
                f.i32(nd.right);
                f.f64(nd.leaf_value);
            }
            w.section(f.buf);
            break;
        }
        case RegressorKind::NeuralNet: {
            const auto& p = std::get<NnPayload>(model.payload);
            Writer f;
            f.u32(std::uint32_t(p.layer_sizes.size()));
            for (int s : p.layer_sizes) f.i32(s);
            w.section(f.buf);
            Writer wf;
            wf.u32(std::uint32_t(p.weights.size()));
            for (const auto& block : p.weights) wf.buf += enc_vec(block);
            w.section(wf.buf);
            Writer bf;
            bf.u32(std::uint32_t(p.biases.size()));
            for (const auto& block : p.biases) bf.buf += enc_vec(block);
            w.section(bf.buf);
            w.section(enc_f64(p.leaky_slope));
            break;
        }
    }
    return w.buf;
}

TrainedModel deserialize_model(const std::string& bytes) {
    Reader r(bytes);
    r.need(6);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw fog_error(errc::schema_mismatch, "bad magic header");
    r.pos = 4;
    if (r.u8() != kVersion)
        throw fog_error(errc::schema_mismatch, "unsupported model version");
    std::uint8_t kb = r.u8();
    if (kb > 3)
        throw fog_error(errc::schema_mismatch, "bad kind byte");

    TrainedModel m;
    switch (kb) {
        case 0: m.kind = RegressorKind::Knn; break;
        case 1: m.kind = RegressorKind::Svr; break;
        case 2: m.kind = RegressorKind::DecisionTree; break;
        case 3: m.kind = RegressorKind::NeuralNet; break;
    }
    FieldReader fr{r};
    m.standardizer.means = dec_vec(fr.take());
    m.standardizer.stdevs = dec_vec(fr.take());
    if (m.standardizer.means.size() != m.standardizer.stdevs.size())
        throw fog_error(errc::schema_mismatch, "standardizer width mismatch");

    switch (m.kind) {
        case RegressorKind::Knn: {
            KnnPayload p;
            std::string nb = fr.take();
            if (nb.size() != 4)
                throw fog_error(errc::schema_mismatch, "neighbor section length mismatch");
            p.neighbors = int(Reader(nb).u32());
            p.X = dec_matrix(fr.take());
            p.y = dec_vec(fr.take());
            if (p.X.size() != p.y.size() || p.neighbors <= 0 ||
                std::size_t(p.neighbors) > p.X.size())
                throw fog_error(errc::schema_mismatch, "inconsistent knn payload");
            m.payload = std::move(p);
            break;
        }
        case RegressorKind::Svr: {
            SvrPayload p;
            p.support_x = dec_matrix(fr.take());
            p.dual_coef = dec_vec(fr.take());
            p.bias = dec_f64(fr.take());
            p.gamma = dec_f64(fr.take());
            p.C = dec_f64(fr.take());
            p.epsilon = dec_f64(fr.take());
            p.entry_variance = dec_f64(fr.take());
            std::string cf = fr.take();
            if (cf.size() != 1)
                throw fog_error(errc::schema_mismatch, "converged flag length mismatch");
            p.converged = cf[0] != 0;
            if (p.support_x.size() != p.dual_coef.size())
                throw fog_error(errc::schema_mismatch, "inconsistent svr payload");
            m.payload = std::move(p);
            break;
        }
        case RegressorKind::DecisionTree: {
            TreePayload p;
            std::string nb = fr.take();
            Reader nr(nb);
            std::uint32_t count = nr.u32();
            if (nb.size() != 4 + std::size_t(count) * 28 || count == 0)
                throw fog_error(errc::schema_mismatch, "tree section length mismatch");
            p.nodes.resize(count);
            for (auto& nd : p.nodes) {
                nd.feature = nr.i32();
                nd.threshold = nr.f64();
                nd.left = nr.i32();
                nd.right = nr.i32();
                nd.leaf_value = nr.f64();
                if (nd.feature >= 0 &&
                    (nd.left < 0 || nd.right < 0 || std::uint32_t(nd.left) >= count ||
                     std::uint32_t(nd.right) >= count))
                    throw fog_error(errc::schema_mismatch, "tree child out of range");
            }
            m.payload = std::move(p);
            break;
        }
        case RegressorKind::NeuralNet: {
            NnPayload p;
            std::string ls = fr.take();
            Reader lr(ls);
            std::uint32_t nl = lr.u32();
            if (ls.size() != 4 + std::size_t(nl) * 4 || nl < 2)
                throw fog_error(errc::schema_mismatch, "layer section length mismatch");
            p.layer_sizes.resize(nl);
            for (auto& s : p.layer_sizes) {
                s = lr.i32();
                if (s <= 0) throw fog_error(errc::schema_mismatch, "non-positive layer size");
            }
            auto read_blocks = [&](const std::string& raw) {
                Reader br(raw);
                std::uint32_t blocks = br.u32();
                Rows out(blocks);
                for (auto& block : out) {
                    std::uint32_t count = br.u32();
                    br.need(std::size_t(count) * 8);
                    block.resize(count);
                    for (auto& x : block) x = br.f64();
                }
                if (br.pos != raw.size())
                    throw fog_error(errc::schema_mismatch, "weight section length mismatch");
                return out;
            };
            p.weights = read_blocks(fr.take());
            p.biases = read_blocks(fr.take());
            p.leaky_slope = dec_f64(fr.take());
            if (p.weights.size() != nl - 1 || p.biases.size() != nl - 1)
                throw fog_error(errc::schema_mismatch, "layer/weight count mismatch");
            for (std::size_t l = 0; l + 1 < nl; ++l)
                if (p.weights[l].size() !=
                        std::size_t(p.layer_sizes[l]) * std::size_t(p.layer_sizes[l + 1]) ||
                    p.biases[l].size() != std::size_t(p.layer_sizes[l + 1]))
                    throw fog_error(errc::schema_mismatch, "weight block shape mismatch");
            m.payload = std::move(p);
            break;
        }
    }
    if (r.pos != bytes.size())
        throw fog_error(errc::schema_mismatch, "trailing bytes after model payload");
    return m;
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw fog_error(errc::io_failure, "cannot open '" + path + "' for writing");
    std::string bytes = serialize_model(model);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out)
        throw fog_error(errc::io_failure, "short write to '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw fog_error(errc::io_failure, "cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace fogswitch
