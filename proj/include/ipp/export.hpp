#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ipp/control.hpp"
#include "ipp/moments.hpp"
#include "ipp/sde.hpp"

namespace ipp {

/// Shortest round-trip-stable text with `digits` significant digits.
std::string format_number(double value, int digits = 9);

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// `tau,x,y,z,phi,theta,psi,V,vt,wt,pt,qt,rt`
std::string trajectory_csv(const Trajectory& trajectory);

/// `run,tau,x,y`, one row per impacting run in run order.
std::string impacts_csv(const EnsembleResult& ensemble);

/// `tau,mean_x,mean_y,mean_z,sd_x,sd_y,sd_z` followed by re/im columns of
/// every retained moment.
std::string moments_csv(const MomentSeries& series);

/// `tau,e1,e2,e3,thetaE,psiE,l1,l2,l3,l4,saturated`
std::string control_log_csv(const std::vector<ControlLogEntry>& log);

/// 64-bit FNV-1a digest of the canonical scenario text, as 16 hex digits.
std::string scenario_digest(const Scenario& scenario);

} // namespace ipp
