#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "signopt/signcore.hpp"

namespace signopt {

enum class OptimizerKind { SignSgd, ASignSgd, Lion, GSignSgd, Sgd, Sgdm };

inline std::string kind_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::SignSgd: return "sign_sgd";
    case OptimizerKind::ASignSgd: return "a_sign_sgd";
    case OptimizerKind::Lion: return "lion";
    case OptimizerKind::GSignSgd: return "g_sign_sgd";
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Sgdm: return "sgdm";
  }
  return "?";
}

struct Hyper {
  double gamma = 0.0;
  double theta = 0.0;
  double zeta = 0.0;
  double lambda = 0.0;
  DescentOperator op = DescentOperator::sign_op(1);
};

struct RunRow {
  std::int64_t t = 0;
  double f = 0.0;
  double grad_l1 = 0.0;
  double grad_l2 = 0.0;
  double eps_l2 = std::numeric_limits<double>::quiet_NaN();
  double step_len = 0.0;
  std::int64_t comm_rounds = 0;
  std::int64_t comm_scalars = 0;
};

/// Per-step metric rows plus run metadata. grad_l1/grad_l2 are norms of the
/// exact gradient at the pre-step iterate w^t; eps_l2 = ||m^t - grad f(w^t)||
/// is filled only when momentum-bias logging is on.
struct RunRecord {
  std::string run_id;
  OptimizerKind kind = OptimizerKind::SignSgd;
  Hyper hyper;
  std::uint64_t seed = 0;
  std::int64_t T = 0;
  std::string problem;
  bool log_eps = false;
  bool has_comm = false;
  bool aborted = false;
  std::string abort_reason;
  std::vector<RunRow> rows;
  double mean_grad_l1 = 0.0;
  std::int64_t comm_rounds_total = 0;
  std::int64_t comm_scalars_total = 0;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const RunRecord& rec) {
  out << "t,f,grad_l1,grad_l2,eps_l2,step_len,comm_rounds,comm_scalars\n";
  for (const auto& row : rec.rows) {
    out << row.t << ',' << format_double(row.f) << ','
        << format_double(row.grad_l1) << ',' << format_double(row.grad_l2)
        << ',';
    if (rec.log_eps) out << format_double(row.eps_l2);
    out << ',' << format_double(row.step_len) << ',';
    if (rec.has_comm)
      out << row.comm_rounds << ',' << row.comm_scalars;
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace signopt
