#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uavsat/blur_metric.hpp"
#include "uavsat/errors.hpp"
#include "uavsat/optics.hpp"

namespace uavsat {

struct QLvSample {
    double q = 0.0;
    double lv = 0.0;
};

struct SweepConfig {
    double q_min = 0.25;
    double q_max = 8.0;
    double coarse_step = 0.25;
    double lv_tol = 0.01;   // stop when |LV(q) - target| <= lv_tol
    double q_tol = 1e-3;    // ... or when the bracket is narrower than q_tol
};

struct SurveyCalibration {
    std::string survey_id;
    double q = 0.0;
    double lv_achieved = 0.0;
    std::vector<QLvSample> sweep;
};

struct CalibrationResult {
    double q_star = 0.0;
    double lv_target = 0.0;
    double lv_achieved = 0.0;              // mean of per-survey achieved LV
    std::vector<QLvSample> sweep;          // sweep of the first survey
    std::vector<std::pair<std::string, double>> per_survey_q;
    std::vector<SurveyCalibration> surveys;
};

// LV of the degraded image for each q in the grid. The grid must be
// non-empty, strictly increasing and positive.
inline std::vector<QLvSample> lv_curve(const Raster& uav, double phi,
                                       const std::vector<double>& q_grid) {
    require(!q_grid.empty(), "q grid must be non-empty");
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        require(q_grid[i] > 0.0, "q grid values must be positive");
        require(i == 0 || q_grid[i] > q_grid[i - 1], "q grid must be strictly increasing");
    }
    std::vector<QLvSample> out;
    out.reserve(q_grid.size());
    for (double q : q_grid) {
        DegradeConfig cfg{q, phi, uav.gsd() * phi};
        out.push_back({q, laplacian_variance(degrade(uav, cfg)).lv});
    }
    return out;
}

namespace detail {

inline double lv_of_degraded(const Raster& uav, double phi, double q) {
    DegradeConfig cfg{q, phi, uav.gsd() * phi};
    return laplacian_variance(degrade(uav, cfg)).lv;
}

// Finds the unique grid interval where the curve crosses the target.
// Throws when the target is never reached, or reached more than once.
inline std::size_t locate_crossing(const std::vector<QLvSample>& sweep, double lv_target,
                                   const std::string& id) {
    std::vector<std::size_t> crossings;
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
        const double d0 = sweep[i].lv - lv_target;
        const double d1 = sweep[i + 1].lv - lv_target;
        if (d0 == 0.0 || d0 * d1 < 0.0) crossings.push_back(i);
    }
    if (!sweep.empty() && sweep.back().lv == lv_target) {
        crossings.push_back(sweep.size() - 1);
    }
    if (crossings.empty()) {
        throw DomainError("target not bracketed: LV " + std::to_string(lv_target) +
                          " is outside the sweep range for survey " + id);
    }
    if (crossings.size() > 1) {
        std::string msg = "ambiguous crossing: LV target reached near q = {";
        for (std::size_t i = 0; i < crossings.size(); ++i) {
            if (i) msg += ", ";
            msg += std::to_string(sweep[crossings[i]].q);
        }
        msg += "} for survey " + id;
        throw DomainError(msg);
    }
    return crossings.front();
}

// Coarse sweep + bisection on the unique bracketing interval.
inline SurveyCalibration calibrate_survey(const Raster& uav, double phi, double lv_target,
                                          const SweepConfig& cfg, const std::string& id) {
    require(cfg.q_min > 0.0 && cfg.q_max > cfg.q_min, "invalid sweep range");
    require(cfg.coarse_step > 0.0, "invalid sweep step");

    SurveyCalibration cal;
    cal.survey_id = id;
    for (double q = cfg.q_min; q <= cfg.q_max + 1e-12; q += cfg.coarse_step) {
        cal.sweep.push_back({q, lv_of_degraded(uav, phi, q)});
    }

    const std::size_t i = locate_crossing(cal.sweep, lv_target, id);
    double d_lo = cal.sweep[i].lv - lv_target;
    if (d_lo == 0.0) {
        cal.q = cal.sweep[i].q;
        cal.lv_achieved = cal.sweep[i].lv;
        return cal;
    }
    double q_lo = cal.sweep[i].q;
    double q_hi = cal.sweep[i + 1].q;

    double q_mid = 0.5 * (q_lo + q_hi);
    double lv_mid = lv_of_degraded(uav, phi, q_mid);
    while (std::fabs(lv_mid - lv_target) > cfg.lv_tol && (q_hi - q_lo) > cfg.q_tol) {
        const double d_mid = lv_mid - lv_target;
        if (d_lo * d_mid <= 0.0) {
            q_hi = q_mid;
        } else {
            q_lo = q_mid;
            d_lo = d_mid;
        }
        q_mid = 0.5 * (q_lo + q_hi);
        lv_mid = lv_of_degraded(uav, phi, q_mid);
    }
    cal.q = q_mid;
    cal.lv_achieved = lv_mid;
    return cal;
}

}  // namespace detail

// Reproduces the sweep calibration: the reference image (already at the
// target gsd) fixes the LV target; each survey's curve is intersected with
// it independently and the per-survey q values are averaged.
inline CalibrationResult calibrate_q(const std::vector<Raster>& uav_surveys,
                                     const Raster& reference, double phi,
                                     const SweepConfig& cfg = {},
                                     const std::vector<std::string>& survey_ids = {}) {
    require(!uav_surveys.empty(), "at least one survey raster required");
    require(survey_ids.empty() || survey_ids.size() == uav_surveys.size(),
            "survey id count mismatch");

    CalibrationResult res;
    res.lv_target = laplacian_variance(reference).lv;

    double q_sum = 0.0;
    double lv_sum = 0.0;
    for (std::size_t s = 0; s < uav_surveys.size(); ++s) {
        const std::string id =
            survey_ids.empty() ? "survey_" + std::to_string(s) : survey_ids[s];
        SurveyCalibration cal =
            detail::calibrate_survey(uav_surveys[s], phi, res.lv_target, cfg, id);
        q_sum += cal.q;
        lv_sum += cal.lv_achieved;
        res.per_survey_q.emplace_back(cal.survey_id, cal.q);
        res.surveys.push_back(std::move(cal));
    }
    res.q_star = q_sum / static_cast<double>(uav_surveys.size());
    res.lv_achieved = lv_sum / static_cast<double>(uav_surveys.size());
    res.sweep = res.surveys.front().sweep;
    return res;
}

// JSON report with the sweep tables, for replotting the calibration curves.
inline nlohmann::json calibration_report(const CalibrationResult& res) {
    nlohmann::json j;
    j["lv_target"] = res.lv_target;
    j["q_star"] = res.q_star;
    j["lv_achieved"] = res.lv_achieved;
    j["per_survey_q"] = nlohmann::json::array();
    for (const auto& [id, q] : res.per_survey_q) {
        j["per_survey_q"].push_back({{"survey", id}, {"q", q}});
    }
    j["sweep"] = nlohmann::json::array();
    for (const QLvSample& s : res.sweep) {
        j["sweep"].push_back({{"q", s.q}, {"lv", s.lv}});
    }
    j["sweeps"] = nlohmann::json::array();
    for (const SurveyCalibration& cal : res.surveys) {
        nlohmann::json e;
        e["survey"] = cal.survey_id;
        e["q"] = cal.q;
        e["lv_achieved"] = cal.lv_achieved;
        e["samples"] = nlohmann::json::array();
        for (const QLvSample& s : cal.sweep) {
            e["samples"].push_back({{"q", s.q}, {"lv", s.lv}});
        }
        j["sweeps"].push_back(e);
    }
    return j;
}

}  // namespace uavsat
