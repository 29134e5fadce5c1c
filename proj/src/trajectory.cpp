#include "hosgd/trajectory.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace hosgd {

void write_csv(const Trajectory& traj, std::ostream& out) {
    out << "iter,loss,grad_norm_sq,scalars_sent_cum,fevals_cum,gevals_cum\n";
    char line[256];
    for (const TrajectoryRecord& r : traj.records) {
        std::snprintf(line, sizeof(line),
                      "%ld,%.17g,%.17g,%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n", r.t,
                      r.loss, r.grad_norm_sq, r.scalars_sent_cum, r.fevals_cum,
                      r.gevals_cum);
        out << line;
    }
}

std::string to_csv(const Trajectory& traj) {
    std::ostringstream out;
    write_csv(traj, out);
    return out.str();
}

}  // namespace hosgd
