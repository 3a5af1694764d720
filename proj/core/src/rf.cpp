#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "locagen/models.hpp"
#include "locagen/rng.hpp"

namespace locagen::ml {

int DecisionTree::predict(const std::array<double, data::kNumFeatures>& features) const {
    const TreeNode& leaf = leaf_for(features);
    int best = 0;
    for (std::size_t c = 1; c < leaf.histogram.size(); ++c)
        if (leaf.histogram[c] > leaf.histogram[static_cast<std::size_t>(best)])
            best = static_cast<int>(c);
    return best;
}

const TreeNode& DecisionTree::leaf_for(
    const std::array<double, data::kNumFeatures>& features) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(idx)];
}

int RandomForest::predict(const std::array<double, data::kNumFeatures>& features) const {
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    for (const auto& tree : trees) ++votes[static_cast<std::size_t>(tree.predict(features))];
    int best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

namespace {

struct TrainingView {
    const std::vector<std::array<double, data::kNumFeatures>>* features;
    const std::vector<int>* labels;
    int n_classes;
};

double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct TreeBuilder {
    const TrainingView& view;
    const RfParams& params;
    Rng rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<int>& indices, int begin, int end, int depth) {
        const int count = end - begin;
        std::vector<int> hist(static_cast<std::size_t>(view.n_classes), 0);
        for (int i = begin; i < end; ++i)
            ++hist[static_cast<std::size_t>(
                (*view.labels)[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)])])];

        int present = 0;
        for (int c : hist) present += c > 0 ? 1 : 0;

        const bool stop = depth >= params.max_depth || present <= 1 ||
                          count < 2 * params.min_samples_leaf;
        if (!stop) {
            const auto split = find_best_split(indices, begin, end, hist);
            if (split.valid) {
                // partition in place, stable enough: order inside halves is irrelevant
                int mid = begin;
                for (int i = begin; i < end; ++i) {
                    const int idx = indices[static_cast<std::size_t>(i)];
                    if ((*view.features)[static_cast<std::size_t>(idx)]
                                        [static_cast<std::size_t>(split.feature)] <=
                        split.threshold) {
                        std::swap(indices[static_cast<std::size_t>(i)],
                                  indices[static_cast<std::size_t>(mid)]);
                        ++mid;
                    }
                }
                const int node_index = static_cast<int>(nodes.size());
                nodes.emplace_back();
                nodes[static_cast<std::size_t>(node_index)].feature = split.feature;
                nodes[static_cast<std::size_t>(node_index)].threshold = split.threshold;
                const int left = build(indices, begin, mid, depth + 1);
                const int right = build(indices, mid, end, depth + 1);
                nodes[static_cast<std::size_t>(node_index)].left = left;
                nodes[static_cast<std::size_t>(node_index)].right = right;
                return node_index;
            }
        }

        const int node_index = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(node_index)].histogram = std::move(hist);
        return node_index;
    }

    struct Split {
        bool valid = false;
        int feature = -1;
        double threshold = 0.0;
    };

    Split find_best_split(const std::vector<int>& indices, int begin, int end,
                          const std::vector<int>& parent_hist) {
        const int count = end - begin;
        const double parent_impurity = gini(parent_hist, count);

        int mtry = params.features_per_split;
        if (mtry <= 0)
            mtry = std::max(1, static_cast<int>(std::sqrt(double(data::kNumFeatures))));
        mtry = std::min(mtry, data::kNumFeatures);

        // sample candidate features without replacement
        std::array<int, data::kNumFeatures> feats{};
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const int j = i + static_cast<int>(rng.uniform_index(
                                  static_cast<std::uint64_t>(data::kNumFeatures - i)));
            std::swap(feats[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(j)]);
        }

        Split best;
        double best_gain = 1e-12;  // require strictly positive gain

        std::vector<std::pair<double, int>> column(static_cast<std::size_t>(count));
        std::vector<int> left_hist(static_cast<std::size_t>(view.n_classes));
        for (int fi = 0; fi < mtry; ++fi) {
            const int feature = feats[static_cast<std::size_t>(fi)];
            for (int i = 0; i < count; ++i) {
                const int idx = indices[static_cast<std::size_t>(begin + i)];
                column[static_cast<std::size_t>(i)] = {
                    (*view.features)[static_cast<std::size_t>(idx)]
                                    [static_cast<std::size_t>(feature)],
                    (*view.labels)[static_cast<std::size_t>(idx)]};
            }
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;

            std::fill(left_hist.begin(), left_hist.end(), 0);
            int left_count = 0;
            for (int i = 0; i + 1 < count; ++i) {
                ++left_hist[static_cast<std::size_t>(column[static_cast<std::size_t>(i)].second)];
                ++left_count;
                const double v = column[static_cast<std::size_t>(i)].first;
                const double next = column[static_cast<std::size_t>(i + 1)].first;
                if (v == next) continue;
                if (left_count < params.min_samples_leaf ||
                    count - left_count < params.min_samples_leaf)
                    continue;

                std::vector<int> right_hist(static_cast<std::size_t>(view.n_classes));
                for (std::size_t c = 0; c < right_hist.size(); ++c)
                    right_hist[c] = parent_hist[c] - left_hist[c];
                const double wl = static_cast<double>(left_count) / count;
                const double wr = 1.0 - wl;
                const double gain = parent_impurity - wl * gini(left_hist, left_count) -
                                    wr * gini(right_hist, count - left_count);
                if (gain > best_gain) {
                    best_gain = gain;
                    best.valid = true;
                    best.feature = feature;
                    best.threshold = v + 0.5 * (next - v);
                }
            }
        }
        return best;
    }
};

DecisionTree build_tree(const TrainingView& view, const RfParams& params,
                        std::uint64_t tree_seed) {
    Rng rng(tree_seed);
    const std::size_t n = view.features->size();

    std::vector<int> indices;
    indices.reserve(n);
    if (params.bootstrap) {
        for (std::size_t i = 0; i < n; ++i)
            indices.push_back(static_cast<int>(rng.uniform_index(n)));
    } else {
        for (std::size_t i = 0; i < n; ++i) indices.push_back(static_cast<int>(i));
    }

    TreeBuilder builder{view, params, Rng(rng.next_u64()), {}};
    builder.nodes.reserve(2 * n / static_cast<std::size_t>(params.min_samples_leaf) + 1);
    builder.build(indices, 0, static_cast<int>(indices.size()), 0);
    DecisionTree tree;
    tree.nodes = std::move(builder.nodes);
    return tree;
}

}  // namespace

TrainedModel train_rf(const std::vector<data::LabeledSample>& train, const RfParams& params) {
    if (train.size() < 2) throw std::invalid_argument("train_rf: need at least 2 samples");
    if (params.n_bins != 12 && params.n_bins != 24)
        throw std::invalid_argument("train_rf: n_bins must be 12 or 24");

    TrainedModel model;
    model.kind = TrainedModel::Kind::random_forest;
    model.seed = params.seed;
    model.scaler = data::fit_scaler(train);
    model.dataset_fingerprint = data::fingerprint(train);

    std::vector<std::array<double, data::kNumFeatures>> features(train.size());
    std::vector<int> labels(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        features[i] = model.scaler.transform(train[i].features);
        labels[i] = params.n_bins == 12 ? train[i].bin12 : train[i].bin24;
    }

    int present = 0;
    {
        std::vector<bool> seen(static_cast<std::size_t>(params.n_bins), false);
        for (int l : labels)
            if (!seen[static_cast<std::size_t>(l)]) {
                seen[static_cast<std::size_t>(l)] = true;
                ++present;
            }
    }

    TrainingView view{&features, &labels, params.n_bins};
    model.forest.params = params;
    model.forest.n_classes = params.n_bins;
    model.forest.trees.resize(static_cast<std::size_t>(params.n_trees));

    if (present < 2) {
        // degenerate single-class set: constant predictor
        for (auto& tree : model.forest.trees) {
            TreeNode leaf;
            leaf.histogram.assign(static_cast<std::size_t>(params.n_bins), 0);
            leaf.histogram[static_cast<std::size_t>(labels[0])] =
                static_cast<int>(labels.size());
            tree.nodes.push_back(std::move(leaf));
        }
        return model;
    }

    auto work = [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            const std::uint64_t tree_seed =
                stream_rng(params.seed, static_cast<std::uint64_t>(t), 0x74726565ULL).next_u64();
            model.forest.trees[static_cast<std::size_t>(t)] = build_tree(view, params, tree_seed);
        }
    };

    if (params.n_threads <= 1) {
        work(0, params.n_trees);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (params.n_trees + params.n_threads - 1) / params.n_threads;
        for (int t = 0; t < params.n_threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(begin + chunk, params.n_trees);
            if (begin >= end) break;
            workers.emplace_back(work, begin, end);
        }
        for (auto& w : workers) w.join();
    }
    return model;
}

RfPrediction predict_rf(const TrainedModel& model,
                        const std::array<double, data::kNumFeatures>& raw_features) {
    if (model.kind != TrainedModel::Kind::random_forest)
        throw std::invalid_argument("predict_rf: model is not a random forest");
    const auto scaled = model.scaler.transform(raw_features);
    RfPrediction pred;
    pred.bin = model.forest.predict(scaled);
    pred.angle_deg = data::bin_center_deg(pred.bin, model.forest.n_classes);
    return pred;
}

double circular_mae(const std::vector<double>& predicted_deg,
                    const std::vector<double>& truth_deg) {
    if (predicted_deg.size() != truth_deg.size() || predicted_deg.empty())
        throw std::invalid_argument("circular_mae: length mismatch or empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted_deg.size(); ++i)
        acc += circular_distance_deg(predicted_deg[i], truth_deg[i]);
    return acc / static_cast<double>(predicted_deg.size());
}

double predict_azimuth(const TrainedModel& model,
                       const std::array<double, data::kNumFeatures>& raw_features) {
    return model.kind == TrainedModel::Kind::random_forest
               ? predict_rf(model, raw_features).angle_deg
               : predict_mlp(model, raw_features);
}

}  // namespace locagen::ml
