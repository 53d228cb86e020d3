#pragma once

#include "sid/score_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sid {

struct TrainingSample {
    Eigen::VectorXd x0;  // flat trajectory
    Conditioning cond;
};

struct Dataset {
    int horizon = 64;
    std::uint64_t map_hash = 0;
    std::vector<TrainingSample> samples;
};

struct TrainingConfig {
    double learning_rate = 1e-4;
    int batch_size = 64;
    int epochs = 100;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainingResult {
    Denoiser model;
    std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

// Minimizes the (1 - alpha_t)-weighted denoising score-matching loss,
// implemented as noise regression with per-sample weight
// (1 - alpha_t)/(1 - abar_t). Deterministic for a given rng seed.
// Throws EmptyDataset / NonFiniteLoss.
TrainingResult train_denoiser(const Dataset& dataset, const NoiseSchedule& schedule,
                              const TrainingConfig& config, std::mt19937_64& rng,
                              Denoiser::Arch arch, Denoiser* resume_from = nullptr);

void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

void write_loss_curve_csv(const std::string& path, const std::vector<double>& losses);

}  // namespace sid
