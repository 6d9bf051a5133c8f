// Model file layout (all integers little-endian):
//
//   "SLB1"            magic
//   u32               format version
//   ...               payload, see write_payload()
//   u32               CRC-32 of every preceding byte
//
// Strings are a u32 byte length followed by the bytes; reals are IEEE-754
// binary64 bit patterns.

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "semlab/error.hpp"
#include "semlab/model.hpp"

namespace semlab {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'B', '1'};

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void size(std::size_t n) { u32(static_cast<std::uint32_t>(n)); }
    void str(const std::string& s) {
        size(s.size());
        out_ += s;
    }
    void raw(const char* data, std::size_t n) { out_.append(data, n); }
    std::string& bytes() { return out_; }

private:
    std::string out_;
};

class ByteReader {
public:
    ByteReader(const std::string& bytes, std::size_t begin, std::size_t end) : bytes_(bytes), pos_(begin), end_(end) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() {
        const char* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const char* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t size() { return u32(); }
    std::string str() {
        const std::size_t n = size();
        return std::string(take(n), n);
    }
    bool done() const { return pos_ == end_; }

private:
    const char* take(std::size_t n) {
        if (n > end_ - pos_) throw InputError("corrupted model payload: unexpected end of data");
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }
    const std::string& bytes_;
    std::size_t pos_;
    std::size_t end_;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    while (n > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void write_forest(ByteWriter& w, const RandomForest& f) {
    const ForestConfig& c = f.config;
    w.u64(c.n_trees);
    w.u8(c.max_depth.has_value());
    w.u64(c.max_depth.value_or(0));
    w.u64(c.min_samples_leaf);
    w.u8(c.features_per_split.has_value());
    w.u64(c.features_per_split.value_or(0));
    w.f64(c.leaf_smoothing);
    w.u64(c.seed);
    w.u64(f.classes);
    w.u64(f.dims);
    w.size(f.trees.size());
    for (const auto& t : f.trees) {
        w.size(t.nodes.size());
        for (const auto& n : t.nodes) {
            w.i32(n.feature);
            w.f64(n.threshold);
            w.i32(n.left);
            w.i32(n.right);
            w.u32(n.leaf);
        }
        w.size(t.leaf_values.size());
        for (double v : t.leaf_values) w.f64(v);
    }
}

RandomForest read_forest(ByteReader& r) {
    RandomForest f;
    ForestConfig& c = f.config;
    c.n_trees = r.u64();
    const bool has_depth = r.u8();
    const auto depth = r.u64();
    if (has_depth) c.max_depth = depth;
    c.min_samples_leaf = r.u64();
    const bool has_fps = r.u8();
    const auto fps = r.u64();
    if (has_fps) c.features_per_split = fps;
    c.leaf_smoothing = r.f64();
    c.seed = r.u64();
    f.classes = r.u64();
    f.dims = r.u64();
    f.trees.resize(r.size());
    for (auto& t : f.trees) {
        t.classes = f.classes;
        t.nodes.resize(r.size());
        for (auto& n : t.nodes) {
            n.feature = r.i32();
            n.threshold = r.f64();
            n.left = r.i32();
            n.right = r.i32();
            n.leaf = r.u32();
        }
        t.leaf_values.resize(r.size());
        for (double& v : t.leaf_values) v = r.f64();
        for (const auto& n : t.nodes) {
            const bool bad_leaf = n.feature < 0 && n.leaf + f.classes > t.leaf_values.size();
            const bool bad_split = n.feature >= 0 && (static_cast<std::uint64_t>(n.feature) >= f.dims || n.left < 0 ||
                                                      n.right < 0 || static_cast<std::size_t>(n.left) >= t.nodes.size() ||
                                                      static_cast<std::size_t>(n.right) >= t.nodes.size());
            if (bad_leaf || bad_split) throw InputError("corrupted model payload: invalid tree node");
        }
    }
    return f;
}

void write_mlp(ByteWriter& w, const MlpModel& m) {
    w.f64(m.network.dropout());
    const auto& weights = m.network.weights();
    const auto& biases = m.network.biases();
    w.size(weights.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        w.size(static_cast<std::size_t>(weights[l].rows()));
        w.size(static_cast<std::size_t>(weights[l].cols()));
        for (Eigen::Index i = 0; i < weights[l].size(); ++i) w.f64(weights[l].data()[i]);
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) w.f64(biases[l].data()[i]);
    }
    w.size(m.input_mean.size());
    for (double v : m.input_mean) w.f64(v);
    for (double v : m.input_scale) w.f64(v);
}

MlpModel read_mlp(ByteReader& r) {
    MlpModel m;
    const double dropout = r.f64();
    std::vector<Eigen::MatrixXd> weights(r.size());
    std::vector<Eigen::VectorXd> biases(weights.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto rows = static_cast<Eigen::Index>(r.size());
        const auto cols = static_cast<Eigen::Index>(r.size());
        weights[l].resize(rows, cols);
        for (Eigen::Index i = 0; i < weights[l].size(); ++i) weights[l].data()[i] = r.f64();
        biases[l].resize(rows);
        for (Eigen::Index i = 0; i < rows; ++i) biases[l].data()[i] = r.f64();
    }
    m.network.set_layers(std::move(weights), std::move(biases), dropout);
    m.input_mean.resize(r.size());
    m.input_scale.resize(m.input_mean.size());
    for (double& v : m.input_mean) v = r.f64();
    for (double& v : m.input_scale) v = r.f64();
    return m;
}

void write_payload(ByteWriter& w, const TrainedModel& model) {
    w.u8(model.kind() == ModelKind::Forest ? 0 : 1);
    const FeatureContext& ctx = model.context();
    w.u8(static_cast<std::uint8_t>(ctx.feature_set));
    w.size(model.label_order().size());
    for (const auto& l : model.label_order()) w.str(l.id());
    w.size(model.feature_schema().size());
    for (const auto& name : model.feature_schema()) w.str(name);

    w.size(ctx.profiles.size());
    for (const auto& cls : ctx.profiles.classes()) {
        w.str(cls.label.id());
        for (double v : cls.mean_dist) w.f64(v);
        w.size(cls.representatives.size());
        for (const auto& rep : cls.representatives) {
            w.str(rep.name);
            w.str(rep.owner.first);
            w.str(rep.owner.second);
        }
    }
    w.u64(ctx.name_options.k);
    w.i32(ctx.name_options.scoring.match);
    w.i32(ctx.name_options.scoring.mismatch);
    w.i32(ctx.name_options.scoring.gap);
    w.u8(ctx.training_bags.has_value());
    const BagConfig bags = ctx.training_bags.value_or(BagConfig{});
    w.u64(bags.num_bags);
    w.u64(bags.bag_size);
    w.u64(bags.seed);

    const TrainingMetadata& meta = model.metadata();
    w.str(meta.config.dump());
    w.u64(meta.seed);
    w.u64(meta.instances);

    if (const auto* forest = model.forest()) {
        write_forest(w, *forest);
    } else {
        write_mlp(w, *model.mlp());
    }
}

TrainedModel read_payload(ByteReader& r) {
    const std::uint8_t kind = r.u8();
    if (kind > 1) throw InputError("corrupted model payload: unknown model kind");
    FeatureContext ctx;
    const std::uint8_t set = r.u8();
    if (set > 2) throw InputError("corrupted model payload: unknown feature set");
    ctx.feature_set = static_cast<FeatureSet>(set);

    std::vector<SemanticLabel> labels(r.size(), SemanticLabel::unknown());
    for (auto& l : labels) l = SemanticLabel::from_id(r.str());
    auto schema = std::make_shared<std::vector<std::string>>(r.size());
    for (auto& name : *schema) name = r.str();

    std::vector<ClassProfile> classes(r.size());
    for (auto& cls : classes) {
        cls.label = SemanticLabel::from_id(r.str());
        for (double& v : cls.mean_dist) v = r.f64();
        cls.representatives.resize(r.size());
        for (auto& rep : cls.representatives) {
            rep.name = r.str();
            rep.owner.first = r.str();
            rep.owner.second = r.str();
        }
    }
    ctx.profiles = ClassProfileIndex(std::move(classes));
    ctx.name_options.k = r.u64();
    ctx.name_options.scoring.match = r.i32();
    ctx.name_options.scoring.mismatch = r.i32();
    ctx.name_options.scoring.gap = r.i32();
    const bool has_bags = r.u8();
    BagConfig bags;
    bags.num_bags = r.u64();
    bags.bag_size = r.u64();
    bags.seed = r.u64();
    if (has_bags) ctx.training_bags = bags;

    TrainingMetadata meta;
    try {
        meta.config = nlohmann::json::parse(r.str());
    } catch (const nlohmann::json::parse_error&) {
        throw InputError("corrupted model payload: bad metadata");
    }
    meta.seed = r.u64();
    meta.instances = r.u64();

    std::variant<RandomForest, MlpModel> params;
    if (kind == 0) {
        params = read_forest(r);
    } else {
        params = read_mlp(r);
    }
    if (!r.done()) throw InputError("corrupted model payload: trailing bytes");

    const std::size_t expected_schema = feature_schema(ctx.feature_set, ctx.profiles.labels()).size();
    if (schema->size() != expected_schema) throw InputError("corrupted model payload: schema width mismatch");
    return TrainedModel(std::move(params), std::move(labels), std::move(schema), std::move(ctx), std::move(meta));
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    ByteWriter w;
    w.raw(kMagic, 4);
    w.u32(kModelFormatVersion);
    write_payload(w, model);
    const std::uint32_t crc = crc_of(w.bytes().data(), w.bytes().size());
    w.u32(crc);
    return std::move(w.bytes());
}

TrainedModel deserialize_model(const std::string& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw InputError("not a model file (missing SLB1 magic)");
    }
    ByteReader header(bytes, 4, 8);
    const std::uint32_t version = header.u32();
    if (version != kModelFormatVersion) {
        throw ContractError("model file version " + std::to_string(version) + " is not supported (this build reads version " +
                            std::to_string(kModelFormatVersion) + ")");
    }
    if (bytes.size() < 12) throw InputError("model file checksum mismatch: file truncated");
    const std::size_t body = bytes.size() - 4;
    ByteReader trailer(bytes, body, bytes.size());
    if (trailer.u32() != crc_of(bytes.data(), body)) {
        throw InputError("model file checksum mismatch: file is truncated or corrupted");
    }
    ByteReader payload(bytes, 8, body);
    return read_payload(payload);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    const std::string bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write model file " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("I/O error writing model file " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

nlohmann::json model_to_json(const TrainedModel& model) {
    using json = nlohmann::json;
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["kind"] = to_string(model.kind());
    doc["feature_set"] = to_string(model.context().feature_set);
    json labels = json::array();
    for (const auto& l : model.label_order()) labels.push_back(l.id());
    doc["label_order"] = labels;
    doc["feature_schema"] = model.feature_schema();
    json profiles = json::array();
    for (const auto& cls : model.context().profiles.classes()) {
        json reps = json::array();
        for (const auto& rep : cls.representatives) reps.push_back(rep.name);
        profiles.push_back({{"label", cls.label.id()}, {"representatives", reps}, {"mean_dist", cls.mean_dist}});
    }
    doc["class_profiles"] = profiles;
    doc["name_features"] = {{"k", model.context().name_options.k},
                            {"match", model.context().name_options.scoring.match},
                            {"mismatch", model.context().name_options.scoring.mismatch},
                            {"gap", model.context().name_options.scoring.gap}};
    if (const auto& bags = model.context().training_bags) {
        doc["training_bags"] = {{"num_bags", bags->num_bags}, {"bag_size", bags->bag_size}, {"seed", bags->seed}};
    } else {
        doc["training_bags"] = nullptr;
    }
    doc["metadata"] = {{"config", model.metadata().config},
                       {"seed", model.metadata().seed},
                       {"instances", model.metadata().instances}};
    if (const auto* forest = model.forest()) {
        json trees = json::array();
        for (const auto& t : forest->trees) {
            json nodes = json::array();
            for (const auto& n : t.nodes) {
                if (n.feature < 0) {
                    nodes.push_back({{"leaf", std::vector<double>(t.leaf_values.begin() + n.leaf,
                                                                  t.leaf_values.begin() + n.leaf + t.classes)}});
                } else {
                    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
                }
            }
            trees.push_back({{"nodes", nodes}});
        }
        doc["forest"] = {{"n_trees", forest->trees.size()}, {"classes", forest->classes}, {"dims", forest->dims},
                         {"leaf_smoothing", forest->config.leaf_smoothing}, {"trees", trees}};
    } else {
        const MlpModel& m = *model.mlp();
        json layers = json::array();
        for (std::size_t l = 0; l < m.network.weights().size(); ++l) {
            const auto& w = m.network.weights()[l];
            const auto& b = m.network.biases()[l];
            layers.push_back({{"rows", w.rows()},
                              {"cols", w.cols()},
                              {"weights_col_major", std::vector<double>(w.data(), w.data() + w.size())},
                              {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
        }
        doc["mlp"] = {{"dropout", m.network.dropout()}, {"layers", layers}, {"input_mean", m.input_mean},
                      {"input_scale", m.input_scale}};
    }
    return doc;
}

}  // namespace semlab
