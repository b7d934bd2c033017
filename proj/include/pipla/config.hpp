#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pipla/core.hpp"

namespace pipla {

struct ModelConfig {
  std::string name = "logistic_laplace";  // gaussian_toy logistic_laplace logistic_uniform deblur completion bnn
  std::uint64_t data_seed = 1;
  // gaussian_toy
  int toy_dim = 10;
  double toy_theta = 1.0;
  // logistic
  int d_x = 50;
  int d_y = 900;
  double theta_true = 0.0;  // 0: prior default (-4 laplace, 1.5 uniform)
  bool iterative_prox = false;
  // deblur
  std::string image;  // PGM path, empty: synthetic phantom
  int image_size = 64;
  int blur = 10;
  double noise_sigma = 0.0;  // <= 0: 30 dB default
  std::string tv_solver = "douglas_rachford";
  int tv_iterations = 200;
  double tv_tolerance = 1e-6;
  // completion
  int rows = 32;
  int cols = 32;
  int rank = 2;
  double mask_fraction = 0.3;
  double completion_sigma = -1.0;  // < 0: 0.1
  // bnn
  int hidden = 40;
  std::string activation = "tanh";
  int n_train = 200;
  int n_test = 200;
  int features = 10;
  std::string idx_images;
  std::string idx_labels;
  int class_a = 4;
  int class_b = 9;
};

struct SweepAxes {
  std::vector<std::string> algorithms;  // empty: the algorithm section's value
  std::vector<int> n_particles;
  std::vector<double> gamma;
  std::vector<double> lambda;
  std::vector<std::uint64_t> seeds;
};

struct ProxCheckConfig {
  int cases = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> operators;  // empty: all
  std::string fault;                   // "", soft_threshold_sign
};

struct ExperimentConfig {
  ModelConfig model;
  AlgoConfig algo;
  SweepAxes sweep;
  ProxCheckConfig prox_check;
  std::string out_dir = "out";
};

ExperimentConfig default_experiment();

// parses onto `base`; unknown sections/keys and malformed values raise config_error naming the key
void parse_config_text(const std::string& text, ExperimentConfig& base, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
void set_config_value(ExperimentConfig& cfg, const std::string& section_dot_key, const std::string& value);

// resolved config in the same format; parse_config_text(render_config(c)) reproduces c
std::string render_config(const ExperimentConfig& cfg);

// sweep axes with empty lists filled from the algorithm section
SweepAxes resolved_axes(const ExperimentConfig& cfg);

}  // namespace pipla
