#pragma once

#include "mlt/cdma.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mlt::io {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a JSON object of CdmaConfig fields on top of `base`. Recognised keys:
/// experiment, L, K, n_t, n_r, snr_db_grid, user_grid, fixed_snr_db, es,
/// constellation ("qam4"), min_bit_errors, n_channel_realizations,
/// frames_per_realization, max_bits, master_seed. Any other key is an error.
cdma::CdmaConfig parse_cdma_config(std::string_view json_text, cdma::CdmaConfig base);

/// The CSV header line (no newline).
std::string_view csv_header();

/// Header plus one row per record, LF line endings, shortest round-trip
/// decimal formatting independent of locale.
std::string to_csv(const std::vector<cdma::CdmaRecord>& records);

/// Inverse of to_csv.
std::vector<cdma::CdmaRecord> parse_csv(std::string_view text);

std::string format_double(double v);

}  // namespace mlt::io
