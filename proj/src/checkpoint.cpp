#include "fakespot/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "fakespot/atomic_file.hpp"
#include "fakespot/metrics.hpp"

namespace fakespot {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint codec assumes a little-endian host");
static_assert(sizeof(float) == 4);

constexpr char kMagic[4] = {'F', 'S', 'P', 'T'};

class Writer {
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const unsigned char*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u16(std::uint16_t v) { bytes(&v, sizeof v); }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void text(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void tensor(const Tensor4& t, std::vector<std::uint32_t> dims)
    {
        u32(static_cast<std::uint32_t>(dims.size()));
        for (auto d : dims) u32(d);
        bytes(t.data().data(), t.size() * sizeof(float));
    }
    std::vector<unsigned char>& buffer() { return out_; }

private:
    std::vector<unsigned char> out_;
};

class Reader {
public:
    Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    void bytes(void* p, std::size_t n)
    {
        if (n > size_ - pos_) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
        std::memcpy(p, data_ + pos_, n);
        pos_ += n;
    }
    std::uint16_t u16()
    {
        std::uint16_t v;
        bytes(&v, sizeof v);
        return v;
    }
    std::uint32_t u32()
    {
        std::uint32_t v;
        bytes(&v, sizeof v);
        return v;
    }
    std::string text()
    {
        const auto n = u32();
        if (n > size_ - pos_) throw CheckpointError("checkpoint truncated inside a string field");
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return size_ - pos_; }

private:
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const unsigned char* p, std::size_t n)
{
    return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

std::vector<std::uint32_t> stored_dims(const Tensor4& t, bool conv_weight, bool weight)
{
    const auto& s = t.shape();
    const auto u = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
    if (conv_weight) return {u(s.n), u(s.c), u(s.h), u(s.w)};
    if (weight) return {u(s.n), u(s.c)};
    return {u(s.n)};
}

std::string provenance_text(const nn::TrainedModel& m)
{
    using metrics::format_number;
    std::string s = "seed=" + std::to_string(m.provenance.seed) + ";epochs=" + std::to_string(m.provenance.epochs) +
                    ";batch_size=" + std::to_string(m.provenance.batch_size) +
                    ";learning_rate=" + format_number(m.provenance.learning_rate);
    if (m.optimizer) {
        const auto& c = m.optimizer->config;
        s += ";adam_step=" + std::to_string(m.optimizer->step) + ";adam_lr=" + format_number(c.learning_rate) +
             ";adam_beta1=" + format_number(c.beta1) + ";adam_beta2=" + format_number(c.beta2) +
             ";adam_epsilon=" + format_number(c.epsilon);
    }
    return s;
}

std::map<std::string, std::string> parse_pairs(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw CheckpointError("malformed provenance entry '" + item + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

template <typename Fn>
auto parse_field(const std::map<std::string, std::string>& kv, const std::string& key, Fn fn)
{
    const auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError("provenance is missing '" + key + "'");
    try {
        return fn(it->second);
    } catch (const std::exception&) {
        throw CheckpointError("provenance field '" + key + "' has invalid value '" + it->second + "'");
    }
}

void write_params(Writer& w, const nn::Parameters<float>& p)
{
    for (const auto& l : p.conv) {
        w.tensor(l.weight, stored_dims(l.weight, true, true));
        w.tensor(l.bias, stored_dims(l.bias, false, false));
    }
    for (const auto& l : p.dense) {
        w.tensor(l.weight, stored_dims(l.weight, false, true));
        w.tensor(l.bias, stored_dims(l.bias, false, false));
    }
}

void read_params(Reader& r, nn::Parameters<float>& p)
{
    std::size_t index = 0;
    auto read_into = [&](Tensor4& t, const std::vector<std::uint32_t>& expected) {
        const auto rank = r.u32();
        if (rank > 4) throw CheckpointError("tensor " + std::to_string(index) + " has rank " + std::to_string(rank));
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) d = r.u32();
        if (dims != expected) throw CheckpointError("tensor " + std::to_string(index) + " does not match the topology");
        r.bytes(t.data().data(), t.size() * sizeof(float));
        ++index;
    };
    for (auto& l : p.conv) {
        read_into(l.weight, stored_dims(l.weight, true, true));
        read_into(l.bias, stored_dims(l.bias, false, false));
    }
    for (auto& l : p.dense) {
        read_into(l.weight, stored_dims(l.weight, false, true));
        read_into(l.bias, stored_dims(l.bias, false, false));
    }
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const nn::TrainedModel& model)
{
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u16(kCheckpointVersion);
    w.text(model.topology.descriptor());
    w.text(provenance_text(model));
    const auto per_set = static_cast<std::uint32_t>(model.params.tensors().size());
    w.u32(model.optimizer ? 3 * per_set : per_set);
    write_params(w, model.params);
    if (model.optimizer) {
        write_params(w, model.optimizer->first_moment);
        write_params(w, model.optimizer->second_moment);
    }
    auto& buf = w.buffer();
    w.u32(crc32_of(buf.data(), buf.size()));
    return std::move(buf);
}

nn::TrainedModel decode_checkpoint(const std::vector<unsigned char>& bytes)
{
    if (bytes.size() < sizeof kMagic + 2) throw CheckpointError("checkpoint truncated: missing header");
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError("not a checkpoint: bad magic");
    std::uint16_t version;
    std::memcpy(&version, bytes.data() + sizeof kMagic, sizeof version);
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (supported: " +
                              std::to_string(kCheckpointVersion) + ")");
    }
    if (bytes.size() < sizeof kMagic + 2 + 4) throw CheckpointError("checkpoint truncated: missing CRC");
    const std::size_t body = bytes.size() - 4;
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + body, sizeof stored_crc);
    if (crc32_of(bytes.data(), body) != stored_crc) throw CheckpointError("checkpoint CRC mismatch: file is corrupted or truncated");

    Reader r(bytes.data() + sizeof kMagic + 2, body - sizeof kMagic - 2);
    nn::TrainedModel m;
    try {
        m.topology = nn::ModelTopology::parse(r.text());
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(std::string("checkpoint topology: ") + e.what());
    }
    const auto kv = parse_pairs(r.text());
    m.provenance.seed = parse_field(kv, "seed", [](const std::string& v) { return std::stoull(v); });
    m.provenance.epochs = parse_field(kv, "epochs", [](const std::string& v) { return static_cast<std::uint32_t>(std::stoul(v)); });
    m.provenance.batch_size =
        parse_field(kv, "batch_size", [](const std::string& v) { return static_cast<std::uint32_t>(std::stoul(v)); });
    m.provenance.learning_rate = parse_field(kv, "learning_rate", [](const std::string& v) { return std::stod(v); });

    m.params = nn::zero_parameters<float>(m.topology);
    const auto per_set = static_cast<std::uint32_t>(m.params.tensors().size());
    const auto count = r.u32();
    if (count != per_set && count != 3 * per_set) {
        throw CheckpointError("checkpoint holds " + std::to_string(count) + " tensors; topology needs " +
                              std::to_string(per_set) + " (or " + std::to_string(3 * per_set) + " with optimizer state)");
    }
    read_params(r, m.params);
    if (count == 3 * per_set) {
        nn::AdamConfig cfg;
        cfg.learning_rate = parse_field(kv, "adam_lr", [](const std::string& v) { return std::stod(v); });
        cfg.beta1 = parse_field(kv, "adam_beta1", [](const std::string& v) { return std::stod(v); });
        cfg.beta2 = parse_field(kv, "adam_beta2", [](const std::string& v) { return std::stod(v); });
        cfg.epsilon = parse_field(kv, "adam_epsilon", [](const std::string& v) { return std::stod(v); });
        auto state = nn::make_adam_state<float>(m.topology, cfg);
        state.step = parse_field(kv, "adam_step", [](const std::string& v) { return std::stoull(v); });
        read_params(r, state.first_moment);
        read_params(r, state.second_moment);
        m.optimizer = std::move(state);
    }
    if (r.remaining() != 0) throw CheckpointError("checkpoint has " + std::to_string(r.remaining()) + " unexpected trailing bytes");
    return m;
}

void save_checkpoint(const nn::TrainedModel& model, const std::filesystem::path& path)
{
    const auto bytes = encode_checkpoint(model);
    write_file_atomically(path, std::span<const unsigned char>(bytes));
}

nn::TrainedModel load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace fakespot
