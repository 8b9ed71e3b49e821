#include "art/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "art/errors.hpp"

namespace art::harness {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'R', 'T', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw DataError("checkpoint truncated in header");
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

std::string dims_text(const Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out.empty() ? "scalar" : out;
}

Shape parse_dims(const std::string& text) {
    if (text == "scalar") return {};
    Shape out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, 'x')) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw DataError("checkpoint manifest: bad shape `" + text + "`");
        }
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const ParameterSet& params) {
    std::ostringstream manifest;
    manifest << config.to_text() << "---\n";
    std::uint64_t offset = 0;
    for (const auto& p : params) {
        manifest << p.name << ' ' << dims_text(p.tensor.shape()) << ' ' << offset << '\n';
        offset += 8 * p.tensor.numel();
    }
    const std::string text = manifest.str();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write checkpoint " + tmp.string());
        out.write(kMagic.data(), 4);
        put_u32(out, kCheckpointVersion);
        put_u32(out, static_cast<std::uint32_t>(text.size()));
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& p : params) {
            for (double v : p.tensor.data()) put_f64(out, v);
        }
        if (!out) throw DataError("failed writing checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read checkpoint " + path.string());
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (!in || magic != kMagic) throw DataError(path.string() + " is not a checkpoint (bad magic)");

    Checkpoint ck;
    ck.version = get_u32(in);
    if (ck.version != kCheckpointVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(ck.version));
    }
    const std::uint32_t length = get_u32(in);
    std::string text(length, '\0');
    in.read(text.data(), length);
    if (!in) throw DataError("checkpoint truncated in manifest");

    const auto sep = text.find("---\n");
    if (sep == std::string::npos) throw DataError("checkpoint manifest has no parameter section");
    try {
        ck.config = parse_config(text.substr(0, sep));
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint config: ") + e.what());
    }

    std::istringstream entries(text.substr(sep + 4));
    std::string line;
    std::uint64_t payload = 0;
    while (std::getline(entries, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        ManifestEntry e;
        std::string dims;
        if (!(fields >> e.name >> dims >> e.offset)) throw DataError("checkpoint manifest: bad line `" + line + "`");
        e.shape = parse_dims(dims);
        if (e.offset != payload) throw DataError("checkpoint manifest: offset mismatch for " + e.name);
        payload += 8 * shape_numel(e.shape);
        ck.manifest.push_back(std::move(e));
    }

    std::vector<unsigned char> bytes(payload);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(payload));
    if (!in) throw DataError("checkpoint truncated in payload");
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint has trailing bytes");

    for (const auto& e : ck.manifest) {
        std::vector<double> buf(shape_numel(e.shape));
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = get_f64(bytes.data() + e.offset + 8 * i);
        ck.buffers.push_back(std::move(buf));
    }
    return ck;
}

std::vector<std::string> structural_mismatches(const ModelConfig& ck, const ModelConfig& cfg) {
    std::vector<std::string> out;
    auto check = [&out](const char* field, const std::string& a, const std::string& b) {
        if (a != b) out.push_back(std::string(field) + " (checkpoint " + a + ", config " + b + ")");
    };
    check("model.d", std::to_string(ck.d), std::to_string(cfg.d));
    check("model.heads", std::to_string(ck.heads), std::to_string(cfg.heads));
    check("model.layers", std::to_string(ck.layers), std::to_string(cfg.layers));
    check("model.k", std::to_string(ck.k), std::to_string(cfg.k));
    check("data.t_h", std::to_string(ck.t_h), std::to_string(cfg.t_h));
    check("data.t_f", std::to_string(ck.t_f), std::to_string(cfg.t_f));
    check("model.pooling", rt::to_string(ck.pooling), rt::to_string(cfg.pooling));
    return out;
}

void load_parameters(const Checkpoint& ck, ParameterSet& params) {
    if (ck.manifest.size() != params.size()) {
        throw IncompatibilityError("checkpoint has " + std::to_string(ck.manifest.size()) + " parameters, model has " +
                                   std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < ck.manifest.size(); ++i) {
        const auto& e = ck.manifest[i];
        const Parameter* p = params.find(e.name);
        if (!p) throw IncompatibilityError("checkpoint parameter " + e.name + " not in model");
        if (p->tensor.shape() != e.shape) {
            throw IncompatibilityError("parameter " + e.name + ": checkpoint " + shape_str(e.shape) + ", model " +
                                       shape_str(p->tensor.shape()));
        }
        Tensor t = p->tensor;
        auto dst = t.mutable_data();
        std::memcpy(dst.data(), ck.buffers[i].data(), 8 * ck.buffers[i].size());
    }
}

}  // namespace art::harness
