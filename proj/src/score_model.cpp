#include "sid/score_model.hpp"

#include "sid/errors.hpp"
#include "sid/rng.hpp"
#include "sid/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sid {

using json = nlohmann::ordered_json;

Eigen::VectorXd Conditioning::as_vector() const {
    Eigen::VectorXd v(4 + map_patch.size());
    v[0] = start.x();
    v[1] = start.y();
    v[2] = goal.x();
    v[3] = goal.y();
    if (map_patch.size() > 0) v.tail(map_patch.size()) = map_patch;
    return v;
}

Eigen::VectorXd occupancy_patch(const WorldMap& map, int res) {
    Eigen::VectorXd patch(res * res);
    const double cw = map.width() / res;
    const double ch = map.height() / res;
    const int sub = 4;
    for (int iy = 0; iy < res; ++iy) {
        for (int ix = 0; ix < res; ++ix) {
            int hits = 0;
            for (int sy = 0; sy < sub; ++sy) {
                for (int sx = 0; sx < sub; ++sx) {
                    const Vec2 p(map.lo.x() + (ix + (sx + 0.5) / sub) * cw,
                                 map.lo.y() + (iy + (sy + 0.5) / sub) * ch);
                    for (const auto& o : map.obstacles) {
                        if (o.signed_distance(p) < 0.0) {
                            ++hits;
                            break;
                        }
                    }
                }
            }
            patch[iy * res + ix] = static_cast<double>(hits) / (sub * sub);
        }
    }
    return patch;
}

AnalyticBridgeScore::AnalyticBridgeScore(NoiseSchedule schedule, int horizon, double sigma0)
    : schedule_(std::move(schedule)), horizon_(horizon), sigma0_(sigma0) {}

Eigen::VectorXd AnalyticBridgeScore::mean(const Conditioning& cond) const {
    return flatten(straight_line(cond.start, cond.goal, horizon_));
}

Eigen::VectorXd AnalyticBridgeScore::score(const Eigen::VectorXd& xt, int t,
                                           const Conditioning& cond) const {
    const double abar = schedule_.alpha_bar_at(t);
    const double var = abar * sigma0_ * sigma0_ + (1.0 - abar);
    return -(xt - std::sqrt(abar) * mean(cond)) / var;
}

namespace {

inline double silu(double a) { return a / (1.0 + std::exp(-a)); }

inline double silu_grad(double a) {
    const double s = 1.0 / (1.0 + std::exp(-a));
    return s * (1.0 + a * (1.0 - s));
}

}  // namespace

Denoiser::Denoiser(Arch arch, NoiseSchedule schedule, std::uint64_t init_seed)
    : arch_(arch), schedule_(std::move(schedule)) {
    std::mt19937_64 rng = make_rng(init_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto init = [&](Eigen::MatrixXd& w, int rows, int cols) {
        w.resize(rows, cols);
        const double scale = std::sqrt(2.0 / cols);
        for (int c = 0; c < cols; ++c) {
            for (int r = 0; r < rows; ++r) w(r, c) = scale * normal(rng);
        }
    };
    const int in_dim = arch_.x_dim + arch_.embed_dim + arch_.cond_dim;
    init(w_in_, arch_.width, in_dim);
    b_in_ = Eigen::VectorXd::Zero(arch_.width);
    w_hidden_.resize(arch_.depth);
    b_hidden_.resize(arch_.depth);
    for (int l = 0; l < arch_.depth; ++l) {
        init(w_hidden_[l], arch_.width, arch_.width);
        // Damp residual branches at init so the network starts near identity.
        w_hidden_[l] *= 0.1;
        b_hidden_[l] = Eigen::VectorXd::Zero(arch_.width);
    }
    init(w_out_, arch_.x_dim, arch_.width);
    w_out_ *= 0.1;
    b_out_ = Eigen::VectorXd::Zero(arch_.x_dim);
}

Eigen::VectorXd Denoiser::time_embedding(int t) const {
    Eigen::VectorXd e(arch_.embed_dim);
    const int half = arch_.embed_dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    return e;
}

Eigen::VectorXd Denoiser::assemble_input(const Eigen::VectorXd& xt, int t,
                                         const Conditioning& cond) const {
    const Eigen::VectorXd cv = cond.as_vector();
    if (xt.size() != arch_.x_dim || cv.size() != arch_.cond_dim) {
        throw DimensionMismatch("Denoiser: input or conditioning dimension mismatch");
    }
    Eigen::VectorXd in(arch_.x_dim + arch_.embed_dim + arch_.cond_dim);
    in.head(arch_.x_dim) = xt;
    in.segment(arch_.x_dim, arch_.embed_dim) = time_embedding(t);
    in.tail(arch_.cond_dim) = cv;
    return in;
}

void Denoiser::forward(const Eigen::MatrixXd& inputs, Workspace& ws) const {
    ws.input = inputs;
    const Eigen::Index B = inputs.cols();
    ws.pre.assign(static_cast<size_t>(arch_.depth), Eigen::MatrixXd());
    ws.post.assign(static_cast<size_t>(arch_.depth) + 1, Eigen::MatrixXd());
    ws.post[0] = (w_in_ * inputs).colwise() + b_in_;
    for (int l = 0; l < arch_.depth; ++l) {
        Eigen::MatrixXd a = (w_hidden_[static_cast<size_t>(l)] * ws.post[static_cast<size_t>(l)])
                                .colwise() +
                            b_hidden_[static_cast<size_t>(l)];
        ws.pre[static_cast<size_t>(l)] = a;
        Eigen::MatrixXd act(a.rows(), B);
        for (Eigen::Index c = 0; c < B; ++c) {
            for (Eigen::Index r = 0; r < a.rows(); ++r) act(r, c) = silu(a(r, c));
        }
        ws.post[static_cast<size_t>(l) + 1] = ws.post[static_cast<size_t>(l)] + act;
    }
    ws.out = (w_out_ * ws.post[static_cast<size_t>(arch_.depth)]).colwise() + b_out_;
}

void Denoiser::backward(const Workspace& ws, const Eigen::MatrixXd& dout,
                        std::vector<Eigen::MatrixXd>& dW,
                        std::vector<Eigen::VectorXd>& db) const {
    // Parameter order matches weight_refs()/bias_refs():
    // [w_in, w_hidden..., w_out], [b_in, b_hidden..., b_out].
    const int L = arch_.depth;
    dW.assign(static_cast<size_t>(L) + 2, Eigen::MatrixXd());
    db.assign(static_cast<size_t>(L) + 2, Eigen::VectorXd());

    dW[static_cast<size_t>(L) + 1] = dout * ws.post[static_cast<size_t>(L)].transpose();
    db[static_cast<size_t>(L) + 1] = dout.rowwise().sum();
    Eigen::MatrixXd dh = w_out_.transpose() * dout;

    for (int l = L - 1; l >= 0; --l) {
        const Eigen::MatrixXd& a = ws.pre[static_cast<size_t>(l)];
        Eigen::MatrixXd da(a.rows(), a.cols());
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            for (Eigen::Index r = 0; r < a.rows(); ++r) {
                da(r, c) = silu_grad(a(r, c)) * dh(r, c);
            }
        }
        dW[static_cast<size_t>(l) + 1] = da * ws.post[static_cast<size_t>(l)].transpose();
        db[static_cast<size_t>(l) + 1] = da.rowwise().sum();
        dh += w_hidden_[static_cast<size_t>(l)].transpose() * da;
    }

    dW[0] = dh * ws.input.transpose();
    db[0] = dh.rowwise().sum();
}

Eigen::MatrixXd Denoiser::predict_noise(const Eigen::MatrixXd& inputs) const {
    Workspace ws;
    forward(inputs, ws);
    return ws.out;
}

Eigen::VectorXd Denoiser::score(const Eigen::VectorXd& xt, int t,
                                const Conditioning& cond) const {
    const Eigen::VectorXd in = assemble_input(xt, t, cond);
    Workspace ws;
    forward(in, ws);
    const double abar = schedule_.alpha_bar_at(t);
    return -ws.out.col(0) / std::sqrt(1.0 - abar);
}

std::vector<Eigen::MatrixXd*> Denoiser::weight_refs() {
    std::vector<Eigen::MatrixXd*> refs;
    refs.push_back(&w_in_);
    for (auto& w : w_hidden_) refs.push_back(&w);
    refs.push_back(&w_out_);
    return refs;
}

std::vector<Eigen::VectorXd*> Denoiser::bias_refs() {
    std::vector<Eigen::VectorXd*> refs;
    refs.push_back(&b_in_);
    for (auto& b : b_hidden_) refs.push_back(&b);
    refs.push_back(&b_out_);
    return refs;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
    return v;
}

}  // namespace

std::string Denoiser::to_json() const {
    json j;
    j["format"] = "sid-denoiser-v1";
    j["arch"] = {{"x_dim", arch_.x_dim},
                 {"cond_dim", arch_.cond_dim},
                 {"embed_dim", arch_.embed_dim},
                 {"width", arch_.width},
                 {"depth", arch_.depth}};
    j["schedule"] = {{"T", schedule_.T},
                     {"alpha", vector_to_json(schedule_.alpha)},
                     {"alpha_bar", vector_to_json(schedule_.alpha_bar)}};
    j["w_in"] = matrix_to_json(w_in_);
    j["b_in"] = vector_to_json(b_in_);
    json wh = json::array(), bh = json::array();
    for (const auto& w : w_hidden_) wh.push_back(matrix_to_json(w));
    for (const auto& b : b_hidden_) bh.push_back(vector_to_json(b));
    j["w_hidden"] = wh;
    j["b_hidden"] = bh;
    j["w_out"] = matrix_to_json(w_out_);
    j["b_out"] = vector_to_json(b_out_);
    return j.dump();
}

Denoiser Denoiser::from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "sid-denoiser-v1") {
        throw SidError("Denoiser: unknown checkpoint format");
    }
    Denoiser d;
    const auto& a = j.at("arch");
    d.arch_.x_dim = a.at("x_dim").get<int>();
    d.arch_.cond_dim = a.at("cond_dim").get<int>();
    d.arch_.embed_dim = a.at("embed_dim").get<int>();
    d.arch_.width = a.at("width").get<int>();
    d.arch_.depth = a.at("depth").get<int>();
    const auto& s = j.at("schedule");
    d.schedule_.T = s.at("T").get<int>();
    d.schedule_.alpha = vector_from_json(s.at("alpha"));
    d.schedule_.alpha_bar = vector_from_json(s.at("alpha_bar"));
    d.schedule_.validate();
    d.w_in_ = matrix_from_json(j.at("w_in"));
    d.b_in_ = vector_from_json(j.at("b_in"));
    for (const auto& w : j.at("w_hidden")) d.w_hidden_.push_back(matrix_from_json(w));
    for (const auto& b : j.at("b_hidden")) d.b_hidden_.push_back(vector_from_json(b));
    d.w_out_ = matrix_from_json(j.at("w_out"));
    d.b_out_ = vector_from_json(j.at("b_out"));
    return d;
}

void Denoiser::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw SidError("cannot open for write: " + path);
    f << to_json();
}

Denoiser Denoiser::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SidError("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json(ss.str());
}

}  // namespace sid
