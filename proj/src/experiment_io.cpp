#include "mlt/experiment_io.hpp"

#include <json.hpp>

#include <charconv>
#include <set>

namespace mlt::io {

using nlohmann::json;

namespace {

template <typename T>
T get_number(const json& v, const std::string& key) {
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw ConfigError("'" + key + "' must be a non-negative integer");
  } else {
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  }
  return v.get<T>();
}

template <typename T>
std::vector<T> get_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
  std::vector<T> out;
  for (const auto& e : v) out.push_back(get_number<T>(e, key));
  return out;
}

}  // namespace

cdma::CdmaConfig parse_cdma_config(std::string_view json_text, cdma::CdmaConfig c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "experiment") {
      if (!v.is_string()) throw ConfigError("'experiment' must be a string");
      c.experiment = v.get<std::string>();
    } else if (key == "L") {
      c.L = get_number<Index>(v, key);
    } else if (key == "K") {
      c.K = get_number<Index>(v, key);
    } else if (key == "n_t") {
      c.n_t = get_number<Index>(v, key);
    } else if (key == "n_r") {
      c.n_r = get_number<Index>(v, key);
    } else if (key == "snr_db_grid") {
      c.snr_db_grid = get_list<double>(v, key);
    } else if (key == "user_grid") {
      c.user_grid = get_list<Index>(v, key);
    } else if (key == "fixed_snr_db") {
      c.fixed_snr_db = get_list<double>(v, key);
    } else if (key == "es") {
      c.es = get_number<double>(v, key);
    } else if (key == "constellation") {
      if (!v.is_string() || v.get<std::string>() != "qam4") throw ConfigError("only the \"qam4\" constellation is supported");
    } else if (key == "min_bit_errors") {
      c.min_bit_errors = get_number<std::uint64_t>(v, key);
    } else if (key == "n_channel_realizations") {
      c.n_channel_realizations = get_number<std::uint64_t>(v, key);
    } else if (key == "frames_per_realization") {
      c.frames_per_realization = get_number<Index>(v, key);
    } else if (key == "max_bits") {
      c.max_bits = get_number<std::uint64_t>(v, key);
    } else if (key == "master_seed") {
      c.master_seed = get_number<std::uint64_t>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view csv_header() {
  return "experiment,k,snr_db,receiver,ber,ber_se,nmse,nmse_se,bits,errors,realizations,seed,capped";
}

std::string to_csv(const std::vector<cdma::CdmaRecord>& records) {
  std::string out(csv_header());
  out += '\n';
  for (const auto& r : records) {
    out += r.experiment;
    out += ',' + std::to_string(r.k);
    out += ',' + format_double(r.snr_db);
    out += ',';
    out += cdma::receiver_name(r.receiver);
    out += ',' + format_double(r.ber);
    out += ',' + format_double(r.ber_se);
    out += ',' + format_double(r.nmse);
    out += ',' + format_double(r.nmse_se);
    out += ',' + std::to_string(r.bits);
    out += ',' + std::to_string(r.errors);
    out += ',' + std::to_string(r.realizations);
    out += ',' + std::to_string(r.seed);
    out += r.capped ? ",1\n" : ",0\n";
  }
  return out;
}

namespace {

template <typename T>
T parse_field(std::string_view s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("bad CSV field '" + std::string(s) + "'");
  return v;
}

cdma::Receiver parse_receiver(std::string_view s) {
  for (auto r : cdma::all_receivers)
    if (cdma::receiver_name(r) == s) return r;
  throw ConfigError("unknown receiver '" + std::string(s) + "'");
}

}  // namespace

std::vector<cdma::CdmaRecord> parse_csv(std::string_view text) {
  std::vector<cdma::CdmaRecord> out;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (header) {
      if (line != csv_header()) throw ConfigError("unexpected CSV header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t pos = 0;
    while (true) {
      const auto c = line.find(',', pos);
      f.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
      if (c == std::string_view::npos) break;
      pos = c + 1;
    }
    if (f.size() != 13) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields");
    cdma::CdmaRecord r;
    r.experiment = std::string(f[0]);
    r.k = parse_field<Index>(f[1]);
    r.snr_db = parse_field<double>(f[2]);
    r.receiver = parse_receiver(f[3]);
    r.ber = parse_field<double>(f[4]);
    r.ber_se = parse_field<double>(f[5]);
    r.nmse = parse_field<double>(f[6]);
    r.nmse_se = parse_field<double>(f[7]);
    r.bits = parse_field<std::uint64_t>(f[8]);
    r.errors = parse_field<std::uint64_t>(f[9]);
    r.realizations = parse_field<std::uint64_t>(f[10]);
    r.seed = parse_field<std::uint64_t>(f[11]);
    r.capped = parse_field<int>(f[12]) != 0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mlt::io
