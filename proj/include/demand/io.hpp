#pragma once
// File formats and configuration documents.
//
// Matrices travel in two formats, dispatched on file extension:
//   .csv   one row per line, comma-separated decimals, '#' lines ignored;
//          values are rendered with the shortest decimal form that parses
//          back to the identical double
//   .dmnd  binary: magic "DMND", rows and cols as unsigned 32-bit
//          little-endian, then rows*cols doubles, little-endian, row-major
//
// Configuration and generator specs are strict JSON documents: unknown
// keys are an error (catching typos beats silently using a default), and
// omitted keys take the documented defaults. Readers throw InputError for
// unreadable or malformed data files and ConfigError for bad documents.

#include <cstdint>
#include <string>

#include "demand/decompose.hpp"
#include "demand/matrix.hpp"
#include "demand/synth.hpp"

namespace demand {

// Render one double in its shortest round-trippable decimal form.
std::string format_double(double value);

// Matrix file I/O, dispatched on extension (.csv or .dmnd).
Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Matrix& m);

// Format-explicit entry points (used by the dispatchers above).
Matrix read_matrix_csv(const std::string& path);
Matrix read_matrix_dmnd(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);
void write_matrix_dmnd(const std::string& path, const Matrix& m);

// Parse a strict-JSON configuration document. Top-level keys: lambda,
// max_iters_per_layer, rel_tol, max_layers, activation ("sigmoid" |
// "identity"), adam {alpha, beta1, beta2, eps}, rank {wc_window,
// eps_denom, min_rank}, mbp {enabled, e0, max_iter, guard}, seed.
DemandConfig parse_config_json(const std::string& text);

// Parse a strict-JSON generator spec. Keys: rows, cols, ranks (strictly
// decreasing positive array), noise_sigma, s_density, s_amplitude, seed.
SynthSpec parse_synth_spec_json(const std::string& text);

// Serialize a configuration back to its JSON document form (all keys
// present, alphabetically ordered, stable across runs).
std::string config_to_json(const DemandConfig& cfg);
std::string synth_spec_to_json(const SynthSpec& spec);

// Read a whole text file; throws InputError when unreadable.
std::string read_text_file(const std::string& path);

}  // namespace demand
