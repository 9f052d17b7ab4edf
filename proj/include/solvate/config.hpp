#pragma once

// Experiment configuration: flat INI-style key = value sections.

#include <cstdint>
#include <filesystem>
#include <string>

#include "solvate/converge.hpp"

namespace solvate {

struct ExperimentConfig {
  StudySetup setup;
  std::string output_dir = "out";
  std::string pb_mode = "diffuse";  // pb-solve only: diffuse | sharp
  std::string text;                 // verbatim file contents
  std::uint64_t hash = 0;           // FNV-1a of `text`
};

/// Parses and validates; throws ValidationError listing every problem
/// (unknown keys, malformed values, violated modelling assumptions).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t text_hash(const std::string& text);

}  // namespace solvate
