#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "locagen/models.hpp"

namespace locagen::ml {

namespace {

constexpr const char* kMagic = "locagen-model";
constexpr int kVersion = 1;

void write_double(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

struct Parser {
    std::istream& in;
    long line_no = 0;

    std::string next_line() {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty()) return line;
        }
        throw std::runtime_error("load_model: unexpected end of file at line " +
                                 std::to_string(line_no));
    }

    std::istringstream expect(const std::string& key) {
        std::string line = next_line();
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head != key)
            throw std::runtime_error("load_model: line " + std::to_string(line_no) +
                                     ": expected '" + key + "', got '" + head + "'");
        return ss;
    }
};

void fnv_mix(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
}

std::string serialize_learner(const TrainedModel& model) {
    std::ostringstream out;
    if (model.kind == TrainedModel::Kind::random_forest) {
        const auto& f = model.forest;
        out << "forest " << f.trees.size() << ' ' << f.n_classes << ' ' << f.params.max_depth
            << ' ' << f.params.min_samples_leaf << ' ' << (f.params.bootstrap ? 1 : 0) << ' '
            << f.params.features_per_split << '\n';
        for (const auto& tree : f.trees) {
            out << "tree " << tree.nodes.size() << '\n';
            for (const auto& n : tree.nodes) {
                out << "node " << n.feature << ' ';
                write_double(out, n.threshold);
                out << ' ' << n.left << ' ' << n.right << ' ' << n.histogram.size();
                for (int c : n.histogram) out << ' ' << c;
                out << '\n';
            }
        }
    } else {
        const auto& net = model.mlp;
        out << "mlp " << net.layer_sizes.size() << ' ' << (net.raw_angle ? 1 : 0);
        for (int s : net.layer_sizes) out << ' ' << s;
        out << '\n';
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            out << "layer " << l << '\n';
            out << "weights";
            for (double w : net.weights[l]) {
                out << ' ';
                write_double(out, w);
            }
            out << '\n';
            out << "biases";
            for (double b : net.biases[l]) {
                out << ' ';
                write_double(out, b);
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace

std::uint64_t model_fingerprint(const TrainedModel& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::ostringstream scaler;
    for (int i = 0; i < data::kNumFeatures; ++i) {
        const auto k = static_cast<std::size_t>(i);
        write_double(scaler, model.scaler.mean[k]);
        scaler << ' ';
        write_double(scaler, model.scaler.std_dev[k]);
        scaler << ' ' << (model.scaler.constant[k] ? 1 : 0) << '\n';
    }
    fnv_mix(h, scaler.str());
    fnv_mix(h, serialize_learner(model));
    return h;
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open " + path + " for writing");

    out << kMagic << " v" << kVersion << '\n';
    out << "kind " << (model.kind == TrainedModel::Kind::random_forest ? "rf" : "mlp") << '\n';
    out << "seed " << model.seed << '\n';

    char fp[32];
    std::snprintf(fp, sizeof fp, "%016" PRIx64, model.dataset_fingerprint);
    out << "dataset " << fp << '\n';
    std::snprintf(fp, sizeof fp, "%016" PRIx64, model_fingerprint(model));
    out << "checksum " << fp << '\n';

    out << "scaler " << data::kNumFeatures << '\n';
    for (int i = 0; i < data::kNumFeatures; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out << "feature " << i << ' ';
        write_double(out, model.scaler.mean[k]);
        out << ' ';
        write_double(out, model.scaler.std_dev[k]);
        out << ' ' << (model.scaler.constant[k] ? 1 : 0) << '\n';
    }
    out << serialize_learner(model);
    out << "end\n";
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);

    Parser p{in};
    {
        std::istringstream header(p.next_line());
        std::string magic, version;
        header >> magic >> version;
        if (magic != kMagic)
            throw std::runtime_error("load_model: " + path + " is not a locagen model file");
        if (version != "v1")
            throw std::runtime_error("load_model: unsupported format version '" + version + "'");
    }

    TrainedModel model;
    {
        std::string kind;
        p.expect("kind") >> kind;
        if (kind == "rf")
            model.kind = TrainedModel::Kind::random_forest;
        else if (kind == "mlp")
            model.kind = TrainedModel::Kind::mlp;
        else
            throw std::runtime_error("load_model: unknown model kind '" + kind + "'");
    }
    p.expect("seed") >> model.seed;

    std::uint64_t stored_checksum = 0;
    {
        std::string hex;
        p.expect("dataset") >> hex;
        model.dataset_fingerprint = std::stoull(hex, nullptr, 16);
        p.expect("checksum") >> hex;
        stored_checksum = std::stoull(hex, nullptr, 16);
    }

    int n_features = 0;
    p.expect("scaler") >> n_features;
    if (n_features != data::kNumFeatures)
        throw std::runtime_error("load_model: scaler feature count mismatch");
    for (int i = 0; i < data::kNumFeatures; ++i) {
        auto ss = p.expect("feature");
        int idx = 0, constant = 0;
        const auto k = static_cast<std::size_t>(i);
        ss >> idx >> model.scaler.mean[k] >> model.scaler.std_dev[k] >> constant;
        if (!ss || idx != i)
            throw std::runtime_error("load_model: line " + std::to_string(p.line_no) +
                                     ": malformed scaler entry");
        model.scaler.constant[k] = constant != 0;
    }

    if (model.kind == TrainedModel::Kind::random_forest) {
        auto head = p.expect("forest");
        std::size_t n_trees = 0;
        int bootstrap = 0;
        head >> n_trees >> model.forest.n_classes >> model.forest.params.max_depth >>
            model.forest.params.min_samples_leaf >> bootstrap >>
            model.forest.params.features_per_split;
        if (!head) throw std::runtime_error("load_model: malformed forest header");
        model.forest.params.bootstrap = bootstrap != 0;
        model.forest.params.n_trees = static_cast<int>(n_trees);
        model.forest.params.n_bins = model.forest.n_classes;
        model.forest.params.seed = model.seed;
        model.forest.trees.resize(n_trees);
        for (auto& tree : model.forest.trees) {
            std::size_t n_nodes = 0;
            p.expect("tree") >> n_nodes;
            tree.nodes.resize(n_nodes);
            for (auto& node : tree.nodes) {
                auto ss = p.expect("node");
                std::size_t hist_size = 0;
                ss >> node.feature >> node.threshold >> node.left >> node.right >> hist_size;
                if (!ss)
                    throw std::runtime_error("load_model: line " + std::to_string(p.line_no) +
                                             ": malformed node");
                node.histogram.resize(hist_size);
                for (auto& c : node.histogram) ss >> c;
                if (!ss)
                    throw std::runtime_error("load_model: line " + std::to_string(p.line_no) +
                                             ": truncated node histogram");
            }
        }
    } else {
        auto head = p.expect("mlp");
        std::size_t n_sizes = 0;
        int raw = 0;
        head >> n_sizes >> raw;
        model.mlp.raw_angle = raw != 0;
        model.mlp_params.raw_angle = model.mlp.raw_angle;
        model.mlp.layer_sizes.resize(n_sizes);
        for (auto& s : model.mlp.layer_sizes) head >> s;
        if (!head) throw std::runtime_error("load_model: malformed mlp header");
        for (std::size_t l = 0; l + 1 < n_sizes; ++l) {
            std::size_t idx = 0;
            p.expect("layer") >> idx;
            if (idx != l) throw std::runtime_error("load_model: layer index mismatch");
            const std::size_t n_in = static_cast<std::size_t>(model.mlp.layer_sizes[l]);
            const std::size_t n_out = static_cast<std::size_t>(model.mlp.layer_sizes[l + 1]);
            auto ws = p.expect("weights");
            std::vector<double> w(n_in * n_out);
            for (auto& v : w) ws >> v;
            if (!ws)
                throw std::runtime_error("load_model: line " + std::to_string(p.line_no) +
                                         ": truncated weight row");
            auto bs = p.expect("biases");
            std::vector<double> b(n_out);
            for (auto& v : b) bs >> v;
            if (!bs)
                throw std::runtime_error("load_model: line " + std::to_string(p.line_no) +
                                         ": truncated bias row");
            model.mlp.weights.push_back(std::move(w));
            model.mlp.biases.push_back(std::move(b));
        }
    }

    p.expect("end");
    if (model_fingerprint(model) != stored_checksum)
        throw std::runtime_error("load_model: checksum mismatch, file corrupt or truncated");
    return model;
}

}  // namespace locagen::ml
