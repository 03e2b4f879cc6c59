#include "dualad/error.hpp"
#include "dualad/planners.hpp"

namespace dualad {

const char* to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::idm: return "idm";
    case PlannerKind::lattice: return "lattice";
    case PlannerKind::sampling: return "sampling";
  }
  return "?";
}

PlannerKind planner_kind_from_string(const std::string& s) {
  if (s == "idm") return PlannerKind::idm;
  if (s == "lattice") return PlannerKind::lattice;
  if (s == "sampling") return PlannerKind::sampling;
  throw ConfigError("planner", "unknown planner '" + s + "'");
}

namespace {

class PlannerBase : public Planner {
 public:
  explicit PlannerBase(const PlannerConfig& cfg) : cfg_(cfg) {}
  double desired_speed(const WorldFrame& frame) const override { return dualad::desired_speed(frame, cfg_.planning); }

 protected:
  PlannerConfig cfg_;
};

class IdmPlanner final : public PlannerBase {
 public:
  using PlannerBase::PlannerBase;
  Trajectory plan(const WorldFrame& frame, const ReferencePath& path, double cap) const override {
    return idm_plan(frame, path, cap, cfg_.idm, cfg_.planning);
  }
  PlannerKind kind() const override { return PlannerKind::idm; }
};

class LatticePlanner final : public PlannerBase {
 public:
  using PlannerBase::PlannerBase;
  Trajectory plan(const WorldFrame& frame, const ReferencePath& path, double cap) const override {
    return lattice_plan(frame, path, cap, cfg_.lattice, cfg_.idm, cfg_.planning);
  }
  PlannerKind kind() const override { return PlannerKind::lattice; }
};

class SamplingPlanner final : public PlannerBase {
 public:
  using PlannerBase::PlannerBase;
  Trajectory plan(const WorldFrame& frame, const ReferencePath& path, double cap) const override {
    return sampling_plan(frame, path, cap, cfg_.sampling, cfg_.idm, cfg_.planning);
  }
  PlannerKind kind() const override { return PlannerKind::sampling; }
};

}  // namespace

std::unique_ptr<Planner> make_planner(PlannerKind kind, const PlannerConfig& cfg) {
  cfg.idm.validate();
  switch (kind) {
    case PlannerKind::idm: return std::make_unique<IdmPlanner>(cfg);
    case PlannerKind::lattice:
      cfg.lattice.validate();
      return std::make_unique<LatticePlanner>(cfg);
    case PlannerKind::sampling:
      cfg.sampling.validate();
      return std::make_unique<SamplingPlanner>(cfg);
  }
  throw ConfigError("planner", "unknown planner kind");
}

}  // namespace dualad
