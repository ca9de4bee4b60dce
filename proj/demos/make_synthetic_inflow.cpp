/// @file make_synthetic_inflow.cpp
/// @brief Writes an hourly synthetic discharge CSV suitable for `resop
///        estimate`, so the full estimate -> solve -> simulate pipeline can
///        run without real gauge data.

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "resop/io.hpp"
#include "resop/regime.hpp"

namespace {

struct Clock {
  int year = 2019, month = 1, day = 1, hour = 0;

  void advance_hour() {
    if (++hour < 24) return;
    hour = 0;
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[month - 1];
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) dim = 29;
    if (++day <= dim) return;
    day = 1;
    if (++month <= 12) return;
    month = 1;
    ++year;
  }

  std::string stamp() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:00:00", year, month, day, hour);
    return buf;
  }
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 6) {
    std::fprintf(stderr,
                 "usage: %s <output.csv> <num_regimes> <bin_width> <hours> <seed>\n",
                 argv[0]);
    return 2;
  }
  const std::string path = argv[1];
  const int num_regimes = std::atoi(argv[2]);
  const double bin_width = std::atof(argv[3]);
  const std::size_t hours = static_cast<std::size_t>(std::atol(argv[4]));
  const std::uint64_t seed = static_cast<std::uint64_t>(std::atoll(argv[5]));

  const resop::RegimeModel model = resop::synthetic_model(num_regimes, seed, bin_width);
  const resop::Matrix p = resop::synthetic_transition_matrix(num_regimes, seed);
  const std::vector<double> series =
      resop::synthetic_discharge_series(model, p, hours, 0, seed);

  std::ostringstream out;
  out << "timestamp,discharge_m3s\n";
  Clock clock;
  for (double q : series) {
    out << clock.stamp() << ',' << resop::format_value(q) << '\n';
    clock.advance_hour();
  }
  resop::write_text_atomic(path, out.str());
  std::printf("wrote %zu hourly records to %s\n", series.size(), path.c_str());
  return 0;
}
