#pragma once

#include "rapidstab/moment.hpp"

#include <json.hpp>
#include <string>

namespace rapidstab {

struct RunConfig {
    DipolarMoment mu = DipolarMoment::polynomial({0.0, 0.0, 1.0});
    double lambda = 1.0;
    int N = 64;
    double dt = 1e-3;
    double t_final = 0;  // 0: command default
    int sample_every = 10;
    int init_mode = 2;
    char init_component = 'q';
    std::string init_file;
    bool shifted = false;
    std::string out_dir = ".";
    std::string gains_path;  // simulate: defaults to out_dir/gains.json
    unsigned long seed = 0;
    int grid = 65;  // kernel dump
    int M = 400;    // Saint-Venant cells
    nlohmann::json raw;
};

// Throws UsageError on invalid fields.
RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

int cmd_synth(const RunConfig& c);
int cmd_simulate(const RunConfig& c);
int cmd_kernel(const RunConfig& c);
int cmd_finite_dim(const RunConfig& c);
int cmd_saint_venant(const RunConfig& c);

// Entry point for the rapidstab executable; returns the process exit code.
int run_cli(int argc, char** argv);

// Reads the transform.bin layout written by synth.
Mat read_transform(const std::string& path, int& N);
void write_transform(const std::string& path, const Mat& T, int N);

}  // namespace rapidstab
