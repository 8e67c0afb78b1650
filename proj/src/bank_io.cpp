// Bank file layout (all integers and floats little-endian):
//
//   "TSNNBANK"  u32 version  u64 n_entries
//   u32 L  u32 T  u32 T'  u32 t  u32 tolerance
//   f64 gamma  f64 beta  u32 scaling
//   f64 epsilon  f64 mu  u8 minmax_normalize  u64 sensor_id
//   n_entries x { u64 entry_id  u32 periodic_step  L x (T f64 X, T' f64 Y) }
//   u32 crc32 of every preceding byte

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <boost/crc.hpp>

#include "tsnn/bank.hpp"
#include "tsnn/error.hpp"

namespace tsnn {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'N', 'N', 'B', 'A', 'N', 'K'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 8 + 5 * 4 + 8 + 8 + 4 + 8 + 8 + 1 + 8;
constexpr std::size_t kChecksumBytes = 4;

class Writer {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
        auto bits = std::bit_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<unsigned char>(bits >> (8 * i)));
    }
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    std::vector<unsigned char>& bytes() { return bytes_; }

private:
    std::vector<unsigned char> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
        if (pos_ + sizeof(U) > bytes_.size()) throw DataError("bank file truncated");
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return std::bit_cast<T>(bits);
    }

private:
    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const unsigned char> bytes) {
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

}  // namespace

std::size_t serialized_bank_size(std::size_t entries, std::size_t layers, std::size_t history, std::size_t horizon) {
    return kHeaderBytes + entries * (8 + 4 + layers * (history + horizon) * sizeof(double)) + kChecksumBytes;
}

void save_bank(const MemoryBank& bank, const std::filesystem::path& path) {
    const auto& cfg = bank.config();
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kBankFormatVersion);
    w.put<std::uint64_t>(bank.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.layers));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.history));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.horizon));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.steps_per_period));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.tolerance));
    w.put<double>(cfg.kernel.gamma);
    w.put<double>(cfg.kernel.beta);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.kernel.scaling));
    w.put<double>(cfg.kernel.epsilon);
    w.put<double>(cfg.kernel.mu);
    w.put<std::uint8_t>(cfg.kernel.minmax_normalize ? 1 : 0);
    w.put<std::uint64_t>(bank.sensor_id());

    for (std::size_t j = 0; j < bank.size(); ++j) {
        w.put<std::uint64_t>(bank.entry_id(j));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(bank.periodic_step(j)));
        for (std::size_t l = 0; l < bank.num_layers(); ++l) {
            for (double v : bank.layer(l).x.row(j)) w.put<double>(v);
            for (double v : bank.layer(l).y.row(j)) w.put<double>(v);
        }
    }
    w.put<std::uint32_t>(crc32(w.bytes()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw DataError("failed writing bank file " + path.string());
}

MemoryBank load_bank(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("bank file not found: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < kHeaderBytes + kChecksumBytes) throw DataError("bank file truncated: " + path.string());
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw DataError("not a bank file (bad magic): " + path.string());

    Reader r(std::span<const unsigned char>(bytes).subspan(sizeof kMagic));
    const auto version = r.get<std::uint32_t>();
    if (version != kBankFormatVersion)
        throw DataError("bank format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kBankFormatVersion) + ")");
    const auto n = r.get<std::uint64_t>();
    ModelConfig cfg;
    cfg.layers = r.get<std::uint32_t>();
    cfg.history = r.get<std::uint32_t>();
    cfg.horizon = r.get<std::uint32_t>();
    cfg.steps_per_period = r.get<std::uint32_t>();
    cfg.tolerance = r.get<std::uint32_t>();
    cfg.kernel.gamma = r.get<double>();
    cfg.kernel.beta = r.get<double>();
    const auto scaling = r.get<std::uint32_t>();
    if (scaling > static_cast<std::uint32_t>(Scaling::Sigmoid)) throw DataError("bank file has unknown scaling id");
    cfg.kernel.scaling = static_cast<Scaling>(scaling);
    cfg.kernel.epsilon = r.get<double>();
    cfg.kernel.mu = r.get<double>();
    cfg.kernel.minmax_normalize = r.get<std::uint8_t>() != 0;
    const auto sensor = r.get<std::uint64_t>();
    try {
        cfg.validate();
    } catch (const UsageError& e) {
        throw DataError(std::string("bank file header is invalid: ") + e.what());
    }

    const auto expected = serialized_bank_size(n, cfg.layers, cfg.history, cfg.horizon);
    if (bytes.size() < expected) throw DataError("bank file truncated: " + path.string());
    if (bytes.size() > expected) throw DataError("bank file has trailing bytes: " + path.string());

    const auto body = std::span<const unsigned char>(bytes).first(bytes.size() - kChecksumBytes);
    Reader tail(std::span<const unsigned char>(bytes).last(kChecksumBytes));
    if (tail.get<std::uint32_t>() != crc32(body)) throw DataError("bank file checksum mismatch: " + path.string());

    std::vector<std::size_t> ids(n);
    std::vector<std::size_t> steps(n);
    std::vector<LayerResiduals> layers(cfg.layers);
    for (auto& layer : layers) {
        layer.x = RowMatrix(n, cfg.history);
        layer.y = RowMatrix(n, cfg.horizon);
        layer.x_mean.resize(n);
    }
    for (std::size_t j = 0; j < n; ++j) {
        ids[j] = r.get<std::uint64_t>();
        steps[j] = r.get<std::uint32_t>();
        for (auto& layer : layers) {
            for (double& v : layer.x.row(j)) v = r.get<double>();
            for (double& v : layer.y.row(j)) v = r.get<double>();
        }
    }
    for (auto& layer : layers)
        for (std::size_t j = 0; j < n; ++j) layer.x_mean[j] = mean_of(layer.x.row(j));

    return MemoryBank(cfg, sensor, std::move(ids), std::move(steps), std::move(layers));
}

}  // namespace tsnn
