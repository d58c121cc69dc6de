#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plasmodicke/geometry.hpp"
#include "plasmodicke/lindblad.hpp"
#include "plasmodicke/rates.hpp"

namespace plasmodicke {

// Emitter placement recipe; kept symbolic (rather than as a coordinate list)
// so parameter sweeps can rebuild the geometry per point.
struct LayoutSpec {
  std::string layout = "ring";  // ring | polar | pair | list
  int count = 2;
  double h_nm = 20.0;
  std::string orientation = "radial";  // ring and pair layouts
  double theta_deg = 180.0;            // pair: angular separation
  double offset_deg = 1.0;             // polar: tilt off the pole
  double omega0_eV = 2.77;
  double d0 = 1.0;
  std::vector<Vector3d> positions;     // list layout only
  std::vector<Vector3d> orientations;  // list layout only
};

// One scenario variant inside a sweep: a name plus config-path overrides
// applied before the swept parameter (e.g. each h with its own omega0).
struct SweepVariant {
  std::string name;
  std::vector<std::pair<std::string, double>> set;
};

struct SweepSpec {
  std::string param;  // dotted numeric path, e.g. "emitters.theta_deg"
  double from = 0.0;
  double to = 1.0;
  int steps = 2;  // number of points, endpoints included
  std::vector<SweepVariant> variants;  // empty means a single unnamed pass
};

struct EvolveSpec {
  double t_end_gamma1 = 4.0;  // horizon in units of 1 / Gamma_1
  int samples = 161;
};

// A full run description: geometry recipe plus task list plus output knobs.
struct Scenario {
  std::string name = "custom";
  NanoSphere sphere;
  LayoutSpec emitters;
  NumericalControls controls;
  std::vector<std::string> tasks;  // subset of {modes, rates, eigenstates, evolve, ladder, sweep}
  std::string route = "both";
  std::vector<int> eigen_modes = {0};  // 0 = all multipoles, n = single LSP_n
  EvolveSpec evolve;
  std::optional<SweepSpec> sweep;
  int threads = 0;  // 0 = hardware concurrency (capped by PLASMODICKE_THREADS)
  std::string out_dir;  // empty = "out/<name>"
};

struct OutputFile {
  std::string path;    // relative to the output directory
  std::string digest;  // fnv1a64:<16 hex digits> over the file bytes
};

struct RunManifest {
  std::string scenario;
  std::string directory;
  std::vector<OutputFile> files;
};

struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;   // numeric cells, row per point
  std::vector<std::string> variant_names;  // row-aligned; empty strings if unnamed
};

// Diagnostics, one string per violated invariant. Empty means valid.
std::vector<std::string> validate(const Scenario& scenario);

// Builds the emitter coordinates from the layout recipe.
SystemConfig materialize(const Scenario& scenario);

// Sets a numeric field addressed by a dotted path ("sphere.radius_nm",
// "metal.omega_p_eV", "emitters.h_nm", ...). Throws config_error for unknown
// paths or ones that do not apply to the layout.
void apply_param(Scenario& scenario, const std::string& path, double value);

// JSON scenario file; throws config_error with file/key context. The same
// schema is written back as config.json by run_scenario.
Scenario parse_config(const std::string& path);
Scenario parse_config_text(const std::string& text, const std::string& context);

std::vector<std::string> preset_names();
std::string preset_summary(const std::string& name);
Scenario preset(const std::string& name);

// Runs every requested task and writes CSV/JSON outputs plus a manifest with
// a content digest per file. Identical scenarios produce identical digests.
RunManifest run_scenario(const Scenario& scenario);

// Scalar summaries (single-emitter rate, pair cross rate, brightest
// collective rate, bright-state yield) per sweep point; points are evaluated
// on a worker pool and rows come back ordered variant-major.
SweepTable run_sweep(const Scenario& scenario);

struct PlotStyle {
  bool overlay_ideal = true;
  bool overlay_incoherent = true;
};

// Emission curve plus the two reference curves (ideal cascade, uncoupled
// emitters) on the trace's grid, one CSV per curve, plus a plot-description
// JSON naming axes and normalization. Returns the files written into dir.
std::vector<OutputFile> emit_plot_data(const EmissionTrace& trace, const MatrixXd& gamma,
                                       double gamma1_over_gamma0, const PlotStyle& style,
                                       const std::string& dir);

}  // namespace plasmodicke
