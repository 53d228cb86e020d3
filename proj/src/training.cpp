#include "sid/training.hpp"

#include "sid/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sid {

using json = nlohmann::ordered_json;

namespace {

struct AdamState {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    long step = 0;
};

void adam_update(std::vector<Eigen::MatrixXd*>& weights, std::vector<Eigen::VectorXd*>& biases,
                 const std::vector<Eigen::MatrixXd>& dW, const std::vector<Eigen::VectorXd>& db,
                 AdamState& st, const TrainingConfig& cfg) {
    if (st.mw.empty()) {
        for (auto* w : weights) {
            st.mw.emplace_back(Eigen::MatrixXd::Zero(w->rows(), w->cols()));
            st.vw.emplace_back(Eigen::MatrixXd::Zero(w->rows(), w->cols()));
        }
        for (auto* b : biases) {
            st.mb.emplace_back(Eigen::VectorXd::Zero(b->size()));
            st.vb.emplace_back(Eigen::VectorXd::Zero(b->size()));
        }
    }
    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(st.step));
    for (size_t i = 0; i < weights.size(); ++i) {
        st.mw[i] = cfg.adam_beta1 * st.mw[i] + (1.0 - cfg.adam_beta1) * dW[i];
        st.vw[i] = cfg.adam_beta2 * st.vw[i] + (1.0 - cfg.adam_beta2) * dW[i].cwiseAbs2();
        const Eigen::MatrixXd mhat = st.mw[i] / bc1;
        const Eigen::MatrixXd vhat = st.vw[i] / bc2;
        *weights[i] -= cfg.learning_rate *
                       (mhat.array() / (vhat.array().sqrt() + cfg.adam_eps)).matrix();
    }
    for (size_t i = 0; i < biases.size(); ++i) {
        st.mb[i] = cfg.adam_beta1 * st.mb[i] + (1.0 - cfg.adam_beta1) * db[i];
        st.vb[i] = cfg.adam_beta2 * st.vb[i] + (1.0 - cfg.adam_beta2) * db[i].cwiseAbs2();
        const Eigen::VectorXd mhat = st.mb[i] / bc1;
        const Eigen::VectorXd vhat = st.vb[i] / bc2;
        *biases[i] -= cfg.learning_rate *
                      (mhat.array() / (vhat.array().sqrt() + cfg.adam_eps)).matrix();
    }
}

}  // namespace

TrainingResult train_denoiser(const Dataset& dataset, const NoiseSchedule& schedule,
                              const TrainingConfig& config, std::mt19937_64& rng,
                              Denoiser::Arch arch, Denoiser* resume_from) {
    if (dataset.samples.empty()) throw EmptyDataset("train_denoiser: no samples");
    for (const auto& s : dataset.samples) {
        if (s.x0.size() != arch.x_dim) {
            throw DimensionMismatch("train_denoiser: sample dimension != arch.x_dim");
        }
    }

    TrainingResult result;
    result.model = resume_from ? *resume_from : Denoiser(arch, schedule, rng());
    Denoiser& model = result.model;

    auto weights = model.weight_refs();
    auto biases = model.bias_refs();
    AdamState adam;

    const int n = static_cast<int>(dataset.samples.size());
    const int B = std::min(config.batch_size, n);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    std::uniform_int_distribution<int> t_dist(1, schedule.T);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int in_dim = arch.x_dim + arch.embed_dim + arch.cond_dim;

    Denoiser::Workspace ws;
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (int base = 0; base + B <= n; base += B) {
            Eigen::MatrixXd inputs(in_dim, B);
            Eigen::MatrixXd targets(arch.x_dim, B);
            Eigen::VectorXd weights_t(B);
            for (int k = 0; k < B; ++k) {
                const auto& sample = dataset.samples[static_cast<size_t>(order[base + k])];
                const int t = t_dist(rng);
                const double abar = schedule.alpha_bar_at(t);
                Eigen::VectorXd z(arch.x_dim);
                for (int i = 0; i < arch.x_dim; ++i) z[i] = normal(rng);
                const Eigen::VectorXd xt =
                    std::sqrt(abar) * sample.x0 + std::sqrt(1.0 - abar) * z;
                inputs.col(k) = model.assemble_input(xt, t, sample.cond);
                targets.col(k) = z;
                weights_t[k] = (1.0 - schedule.alpha_at(t)) / (1.0 - abar);
            }

            model.forward(inputs, ws);
            const Eigen::MatrixXd err = ws.out - targets;
            double loss = 0.0;
            for (int k = 0; k < B; ++k) loss += weights_t[k] * err.col(k).squaredNorm();
            loss /= B;
            if (!std::isfinite(loss)) {
                throw NonFiniteLoss("train_denoiser: loss diverged at epoch " +
                                    std::to_string(epoch));
            }
            epoch_loss += loss;
            ++batches;

            Eigen::MatrixXd dout = err;
            for (int k = 0; k < B; ++k) dout.col(k) *= 2.0 * weights_t[k] / B;
            model.backward(ws, dout, dW, db);
            adam_update(weights, biases, dW, db, adam, config);
        }
        result.epoch_loss.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    }
    return result;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
    json j;
    j["format"] = "sid-dataset-v1";
    j["horizon"] = dataset.horizon;
    j["map_hash"] = dataset.map_hash;
    json samples = json::array();
    for (const auto& s : dataset.samples) {
        json rec;
        json x0 = json::array();
        for (Eigen::Index i = 0; i < s.x0.size(); ++i) x0.push_back(s.x0[i]);
        rec["x0"] = std::move(x0);
        rec["start"] = {s.cond.start.x(), s.cond.start.y()};
        rec["goal"] = {s.cond.goal.x(), s.cond.goal.y()};
        json patch = json::array();
        for (Eigen::Index i = 0; i < s.cond.map_patch.size(); ++i) {
            patch.push_back(s.cond.map_patch[i]);
        }
        rec["patch"] = std::move(patch);
        samples.push_back(std::move(rec));
    }
    j["samples"] = std::move(samples);
    std::ofstream f(path);
    if (!f) throw SidError("cannot open for write: " + path);
    f << j.dump();
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SidError("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const json j = json::parse(ss.str());
    if (j.at("format").get<std::string>() != "sid-dataset-v1") {
        throw SidError("load_dataset: unknown format");
    }
    Dataset d;
    d.horizon = j.at("horizon").get<int>();
    d.map_hash = j.at("map_hash").get<std::uint64_t>();
    for (const auto& rec : j.at("samples")) {
        TrainingSample s;
        const auto& x0 = rec.at("x0");
        s.x0.resize(static_cast<Eigen::Index>(x0.size()));
        for (Eigen::Index i = 0; i < s.x0.size(); ++i) {
            s.x0[i] = x0[static_cast<size_t>(i)].get<double>();
        }
        s.cond.start = Vec2(rec.at("start")[0].get<double>(), rec.at("start")[1].get<double>());
        s.cond.goal = Vec2(rec.at("goal")[0].get<double>(), rec.at("goal")[1].get<double>());
        const auto& patch = rec.at("patch");
        s.cond.map_patch.resize(static_cast<Eigen::Index>(patch.size()));
        for (Eigen::Index i = 0; i < s.cond.map_patch.size(); ++i) {
            s.cond.map_patch[i] = patch[static_cast<size_t>(i)].get<double>();
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

void write_loss_curve_csv(const std::string& path, const std::vector<double>& losses) {
    std::ofstream f(path);
    if (!f) throw SidError("cannot open for write: " + path);
    f << "epoch,loss\n";
    for (size_t i = 0; i < losses.size(); ++i) f << i << ',' << losses[i] << '\n';
}

}  // namespace sid
