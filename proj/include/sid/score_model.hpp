#pragma once

#include "sid/geometry.hpp"
#include "sid/schedule.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace sid {

// Conditioning context for one sample: start, goal, and a coarse
// occupancy raster of the map.
struct Conditioning {
    Vec2 start = Vec2::Zero();
    Vec2 goal = Vec2::Zero();
    Eigen::VectorXd map_patch;  // res*res occupancy fractions, may be empty

    Eigen::VectorXd as_vector() const;
};

// res x res raster over the map bounds; each cell holds the fraction of
// 4x4 subsample points lying inside an obstacle.
Eigen::VectorXd occupancy_patch(const WorldMap& map, int res = 8);

// Callable score s(x_t, t, cond); deterministic given inputs.
class ScoreModel {
public:
    virtual ~ScoreModel() = default;
    virtual int dim() const = 0;
    virtual const NoiseSchedule& schedule() const = 0;
    virtual Eigen::VectorXd score(const Eigen::VectorXd& xt, int t,
                                  const Conditioning& cond) const = 0;
};

// Exact score of a Gaussian prior whose mean is the straight start->goal
// line over H+1 waypoints with iid per-coordinate std sigma0, analytically
// noised to level t:
//   s_t(x) = -(x - sqrt(abar_t) mu) / (abar_t sigma0^2 + 1 - abar_t).
class AnalyticBridgeScore : public ScoreModel {
public:
    AnalyticBridgeScore(NoiseSchedule schedule, int horizon, double sigma0 = 0.05);

    int dim() const override { return 2 * (horizon_ + 1); }
    const NoiseSchedule& schedule() const override { return schedule_; }
    Eigen::VectorXd score(const Eigen::VectorXd& xt, int t,
                          const Conditioning& cond) const override;

    Eigen::VectorXd mean(const Conditioning& cond) const;  // mu (flat line)
    double sigma0() const { return sigma0_; }

private:
    NoiseSchedule schedule_;
    int horizon_ = 0;
    double sigma0_ = 0.05;
};

// Fully-connected residual network predicting the forward noise z_hat;
// score(x,t) = -z_hat / sqrt(1 - abar_t). Input layout:
// [x | sinusoidal t embedding | cond vector].
class Denoiser : public ScoreModel {
public:
    struct Arch {
        int x_dim = 130;      // 2*(H+1)
        int cond_dim = 68;    // start(2) + goal(2) + 8x8 patch
        int embed_dim = 32;
        int width = 256;
        int depth = 4;
    };

    Denoiser() = default;
    Denoiser(Arch arch, NoiseSchedule schedule, std::uint64_t init_seed);

    int dim() const override { return arch_.x_dim; }
    const NoiseSchedule& schedule() const override { return schedule_; }
    const Arch& arch() const { return arch_; }

    Eigen::VectorXd score(const Eigen::VectorXd& xt, int t,
                          const Conditioning& cond) const override;

    // Batched noise prediction; columns are samples. `inputs` must already
    // be assembled with assemble_input.
    Eigen::MatrixXd predict_noise(const Eigen::MatrixXd& inputs) const;

    Eigen::VectorXd assemble_input(const Eigen::VectorXd& xt, int t,
                                   const Conditioning& cond) const;
    Eigen::VectorXd time_embedding(int t) const;

    // Parameter access for the trainer (flat list of matrix/vector refs).
    std::vector<Eigen::MatrixXd*> weight_refs();
    std::vector<Eigen::VectorXd*> bias_refs();

    // Forward pass that keeps activations, plus backprop of dL/d(output).
    struct Workspace {
        Eigen::MatrixXd input;
        std::vector<Eigen::MatrixXd> pre;   // A_l per residual layer
        std::vector<Eigen::MatrixXd> post;  // H_l (post-skip activations)
        Eigen::MatrixXd out;
    };
    void forward(const Eigen::MatrixXd& inputs, Workspace& ws) const;
    void backward(const Workspace& ws, const Eigen::MatrixXd& dout,
                  std::vector<Eigen::MatrixXd>& dW, std::vector<Eigen::VectorXd>& db) const;

    std::string to_json() const;
    static Denoiser from_json(const std::string& text);
    void save(const std::string& path) const;
    static Denoiser load(const std::string& path);

private:
    Arch arch_;
    NoiseSchedule schedule_;
    Eigen::MatrixXd w_in_;
    Eigen::VectorXd b_in_;
    std::vector<Eigen::MatrixXd> w_hidden_;
    std::vector<Eigen::VectorXd> b_hidden_;
    Eigen::MatrixXd w_out_;
    Eigen::VectorXd b_out_;
};

}  // namespace sid
