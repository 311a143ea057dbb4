#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vropt {

// One measurement row. grad_norm and objective are exact full evaluations
// done outside the optimizer, so they never touch its counters.
struct TraceRecord {
  long iter = 0;
  long long paper_count = 0;
  long long actual_count = 0;
  double grad_norm = 0.0;
  double objective = 0.0;
  bool full_batch_event = false;      // any full batch/participation since the last record
  std::vector<int> sampled_clients;   // distributed runs: ids from the latest round
};

struct Trace {
  std::vector<TraceRecord> records;
  bool distributed = false;  // adds the sampled_clients column
  bool diverged = false;
  long diverged_at = -1;
  std::string label;         // legend name when plotted
};

// Schema: iter,paper_count,actual_count,grad_norm,objective,full_batch_event
// plus ,sampled_clients for distributed traces (ids ';'-separated inside the
// cell). Reals are %.17g so parsing reproduces the trace bit for bit. A
// diverged run ends with a "# diverged at iteration N" comment line.
void write_trace_csv(const Trace& trace, std::ostream& out);
std::string trace_to_csv(const Trace& trace);
void write_trace_csv_file(const Trace& trace, const std::string& path);

Trace parse_trace_csv(std::istream& in);
Trace parse_trace_csv_text(const std::string& text);
Trace load_trace_csv(const std::string& path);  // label = file stem

}  // namespace vropt
