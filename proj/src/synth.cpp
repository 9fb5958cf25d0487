#include "stepcast/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "stepcast/rng.hpp"

namespace stepcast {

namespace {

// Hourly step-count means of the circadian day profile: near-zero through
// the night, a morning ramp, a midday plateau and an evening decay. The
// profile sums to ~8050 steps/day, inside the 7,000-9,000 guideline band
// before per-user and per-day scaling.
constexpr double kHourProfile[24] = {
    2,   2,   2,   2,   2,   2,    // 00:00-05:59
    40,  150, 420, 600, 700, 750,  // 06:00-11:59
    800, 750, 700, 650, 600, 550,  // 12:00-17:59
    500, 400, 250, 120, 50,  10,   // 18:00-23:59
};

// Weekly seasonality, Monday first: weekdays flat, weekends lower.
constexpr double kDowFactor[7] = {1.00, 1.03, 1.05, 1.03, 1.00, 0.80, 0.75};

constexpr double kUserScaleLo = 0.75;
constexpr double kUserScaleHi = 1.30;
constexpr double kHourNoiseSigma = 0.18;  // multiplicative log-normal sigma
constexpr double kOutlierHighScale = 8.0;
constexpr double kOutlierLowScale = 0.03;
constexpr int kCoarseStartHour = 8;
constexpr int kCoarseEndHour = 16;

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0,1]");
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (n_users < 0) throw std::invalid_argument("n_users must be >= 0");
  if (n_days < 0) throw std::invalid_argument("n_days must be >= 0");
  check_rate(duplicate_rate, "duplicate_rate");
  check_rate(outlier_day_rate, "outlier_day_rate");
  check_rate(nowear_day_rate, "nowear_day_rate");
  check_rate(coarse_record_rate, "coarse_record_rate");
}

std::vector<RawRecord> generate_synthetic_corpus(const SynthConfig& config) {
  config.validate();
  std::vector<RawRecord> out;

  for (int u = 0; u < config.n_users; ++u) {
    Rng rng(mix_seed(config.seed, static_cast<uint64_t>(u)));
    char uid[16];
    std::snprintf(uid, sizeof(uid), "u%04d", u);
    const double user_scale = rng.uniform(kUserScaleLo, kUserScaleHi);

    for (int d = 0; d < config.n_days; ++d) {
      const Date date = kSynthBaseDate.add_days(d);
      const bool nowear = rng.bernoulli(config.nowear_day_rate);
      const bool outlier = rng.bernoulli(config.outlier_day_rate);
      const bool outlier_high = rng.bernoulli(0.5);
      const bool coarse = rng.bernoulli(config.coarse_record_rate);
      if (nowear) continue;

      double day_scale = user_scale * kDowFactor[date.day_of_week()];
      if (outlier) day_scale *= outlier_high ? kOutlierHighScale : kOutlierLowScale;

      // Hourly draws happen for every surviving day so that the stream
      // layout does not depend on the coarse decision.
      int64_t hour_steps[24];
      for (int h = 0; h < 24; ++h) {
        double noise = std::exp(kHourNoiseSigma * rng.normal());
        hour_steps[h] = static_cast<int64_t>(std::llround(kHourProfile[h] * day_scale * noise));
      }

      if (coarse) {
        int64_t total = 0;
        for (int h = kCoarseStartHour; h < kCoarseEndHour; ++h) total += hour_steps[h];
        RawRecord r;
        r.user_id = uid;
        r.start_time = DateTime{date, kCoarseStartHour * 3600};
        r.end_time = DateTime{date, kCoarseEndHour * 3600};
        r.steps = total;
        r.source = "synth-coarse";
        out.push_back(std::move(r));
        continue;
      }

      for (int h = 0; h < 24; ++h) {
        // Durations stay at or under one hour; zero-step hours emit no
        // record, which reads as device-off time downstream.
        int duration_min = 45 + static_cast<int>(rng.below(16));
        bool duplicate = rng.bernoulli(config.duplicate_rate);
        double dup_factor = duplicate ? rng.uniform(0.55, 0.95) : 0.0;
        if (hour_steps[h] <= 0) continue;

        RawRecord r;
        r.user_id = uid;
        r.start_time = DateTime{date, h * 3600};
        r.end_time = r.start_time.add_seconds(duration_min * 60);
        r.steps = hour_steps[h];
        r.source = "synth";
        out.push_back(r);

        if (duplicate) {
          RawRecord dup = r;
          dup.steps = static_cast<int64_t>(std::llround(static_cast<double>(r.steps) * dup_factor));
          dup.source = "synth-mirror";
          out.push_back(std::move(dup));
        }
      }
    }
  }
  return out;
}

}  // namespace stepcast
