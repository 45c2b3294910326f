#include "relext/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace relext {

struct CheckpointAccess {
    static void restore(Trainer& t, OptimizerState opt, const std::string& rng_state, int epoch,
                        std::vector<std::uint32_t> order, std::size_t cursor, BatchLoss epoch_loss) {
        t.optimizer_ = std::move(opt);
        std::istringstream in(rng_state);
        in >> t.rng_;
        if (!in) throw CheckpointError("corrupt RNG state in checkpoint");
        t.epoch_ = epoch;
        t.order_ = std::move(order);
        t.cursor_ = cursor;
        t.epoch_loss_ = epoch_loss;
    }
};

namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'X', 'C', 'K', 'P', 'T'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    template <typename T>
    void pod(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void str(const std::string& s) {
        pod<std::uint64_t>(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void tensor(const Tensor& t) {
        pod<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) pod<std::uint64_t>(d);
        out_.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    template <typename T>
    T pod() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw CheckpointError("truncated checkpoint");
        return v;
    }
    std::string str() {
        const auto n = pod<std::uint64_t>();
        if (n > (1ULL << 32)) throw CheckpointError("corrupt string length in checkpoint");
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        if (!in_) throw CheckpointError("truncated checkpoint");
        return s;
    }
    Tensor tensor() {
        const auto rank = pod<std::uint32_t>();
        if (rank > 8) throw CheckpointError("corrupt tensor rank in checkpoint");
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(pod<std::uint64_t>());
        Tensor t(shape);
        in_.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!in_) throw CheckpointError("truncated checkpoint");
        return t;
    }

private:
    std::istream& in_;
};

}  // namespace

void save_checkpoint(const Trainer& trainer, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.pod<std::uint32_t>(kCheckpointVersion);

    const RelationModel& model = trainer.model();
    std::string cfg;
    for (const auto& [k, v] : to_key_values(model.config())) cfg += k + "=" + v + "\n";
    w.str(cfg);
    w.pod<std::uint64_t>(model.vocab_size());
    w.pod<std::uint64_t>(model.tag_count());
    w.pod<std::uint64_t>(model.class_count());

    w.pod<std::uint32_t>(static_cast<std::uint32_t>(model.params().count()));
    for (const auto& p : model.params()) {
        w.str(p.name);
        w.tensor(p.value);
    }

    const OptimizerState& opt = trainer.optimizer();
    w.pod<double>(opt.config.learning_rate);
    w.pod<double>(opt.config.rho);
    w.pod<double>(opt.config.epsilon);
    w.pod<std::uint64_t>(opt.steps);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(opt.cache.size()));
    for (const auto& [name, cache] : opt.cache) {
        w.str(name);
        w.tensor(cache);
    }

    std::ostringstream rng;
    rng << trainer.rng();
    w.str(rng.str());
    w.pod<std::int32_t>(trainer.epoch());
    w.pod<std::uint64_t>(trainer.cursor());
    w.pod<std::uint64_t>(trainer.order().size());
    for (auto i : trainer.order()) w.pod<std::uint32_t>(i);
    const BatchLoss& el = trainer.epoch_loss();
    w.pod<double>(el.identification);
    w.pod<double>(el.classification);
    w.pod<double>(el.total);
    w.pod<std::uint64_t>(el.instances);
    if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    Reader r(in);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw CheckpointError(path.string() + " is not a checkpoint file");
    }
    const auto version = r.pod<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }

    ModelConfig config;
    std::istringstream cfg(r.str());
    std::string line;
    while (std::getline(cfg, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos || !set_model_key(config, line.substr(0, eq), line.substr(eq + 1))) {
            throw CheckpointError("bad config entry in checkpoint: '" + line + "'");
        }
    }
    const auto vocab = static_cast<std::size_t>(r.pod<std::uint64_t>());
    const auto tags = static_cast<std::size_t>(r.pod<std::uint64_t>());
    const auto classes = static_cast<std::size_t>(r.pod<std::uint64_t>());

    LoadedCheckpoint ck;
    ck.model = std::make_unique<RelationModel>(config, vocab, tags, classes);
    const auto count = r.pod<std::uint32_t>();
    if (count != ck.model->params().count()) throw CheckpointError("parameter count mismatch in checkpoint");
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.str();
        Tensor value = r.tensor();
        Parameter* p = ck.model->params().find(name);
        if (!p || !p->value.same_shape(value)) throw CheckpointError("unexpected parameter '" + name + "' in checkpoint");
        p->value = std::move(value);
    }

    OptimizerState opt;
    opt.config.learning_rate = r.pod<double>();
    opt.config.rho = r.pod<double>();
    opt.config.epsilon = r.pod<double>();
    opt.steps = r.pod<std::uint64_t>();
    const auto caches = r.pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < caches; ++i) {
        std::string name = r.str();
        opt.cache.emplace(std::move(name), r.tensor());
    }
    const std::string rng_state = r.str();
    const auto epoch = r.pod<std::int32_t>();
    const auto cursor = static_cast<std::size_t>(r.pod<std::uint64_t>());
    const auto order_len = r.pod<std::uint64_t>();
    std::vector<std::uint32_t> order(static_cast<std::size_t>(order_len));
    for (auto& o : order) o = r.pod<std::uint32_t>();
    BatchLoss el;
    el.identification = r.pod<double>();
    el.classification = r.pod<double>();
    el.total = r.pod<double>();
    el.instances = static_cast<std::size_t>(r.pod<std::uint64_t>());

    ck.trainer = std::make_unique<Trainer>(*ck.model);
    CheckpointAccess::restore(*ck.trainer, std::move(opt), rng_state, epoch, std::move(order), cursor, el);
    return ck;
}

}  // namespace relext
