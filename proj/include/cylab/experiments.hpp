#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cylab/cylinder.hpp"
#include "cylab/invariants.hpp"
#include "cylab/symplectic.hpp"

namespace cylab {

struct TableRow {
    double parameter = 0.0;
    double defect = 0.0;
    bool operator==(const TableRow&) const = default;
};

/// Outcome of one theorem check.  Inputs are stored as text so that the
/// digest depends only on what was asked, never on what was computed.
struct VerdictReport {
    std::string id;
    std::map<std::string, std::string> inputs;
    std::string inputs_digest;
    cplx lhs;
    cplx rhs;
    double defect = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<TableRow> table;
    std::vector<std::string> notes;
    bool low_confidence = false;

    bool operator==(const VerdictReport&) const = default;
};

/// Builds the inputs map of a report.
class InputRecorder {
public:
    InputRecorder& add(const std::string& key, double v);
    InputRecorder& add(const std::string& key, int v);
    InputRecorder& add(const std::string& key, const std::string& v);
    InputRecorder& add(const std::string& key, const std::vector<double>& v);
    InputRecorder& add(const std::string& key, const Mat& m);
    InputRecorder& add(const std::string& key, const TangentialStructure& T);
    InputRecorder& add(const std::string& key, const PotentialSpec& V);
    const std::map<std::string, std::string>& items() const { return items_; }

private:
    std::map<std::string, std::string> items_;
};

/// 64-bit FNV-1a of the sorted key=value lines, as 16 hex digits.
std::string inputs_digest(const std::map<std::string, std::string>& inputs);

/// Sets digest and pass from the other fields.
void finalize(VerdictReport& r);

/// Circle distance of x to the nearest integer.
double distance_to_integer(double x);

/// κ in κ·log det_F(Φ(P)Φ(Q)*); frozen after calibrate_kappa_sign.
inline constexpr double kKappaSign = 1.0;  // κ = kKappaSign / (2πi)

/// Spectral flow equals kFlowSign times the winding of det Φ(P(θ))Φ(P(0))*.
inline constexpr int kFlowSign = -1;

struct KappaCalibration {
    double sign = 0.0;          ///< ±1, whichever fits
    double defect_plus = 0.0;   ///< worst residue defect with κ = +1/(2πi)
    double defect_minus = 0.0;  ///< with κ = −1/(2πi)
};

/// Fits the sign of κ on the potential-free cylinder with rotated random
/// boundary conditions.
KappaCalibration calibrate_kappa_sign(const TangentialStructure& T, double length, double window,
                                      const std::vector<std::uint64_t>& seeds);

VerdictReport verify_scott_wojciechowski(const TangentialStructure& T, double length,
                                         const std::vector<GrassmannianPoint>& P_list,
                                         double window, double tolerance = 1e-4);

VerdictReport verify_relative_eta(const TangentialStructure& T, double length, const PotentialSpec& V,
                                  const GrassmannianPoint& P, const GrassmannianPoint& Q, double window,
                                  double tolerance = 1e-3);

struct GluingGeometry {
    double length_x = 1.0;
    double length_y = 1.0;
    PotentialSpec V_x;  ///< centre measured on [0, length_x]
    PotentialSpec V_y;  ///< centre measured on [0, length_y]
};

/// P is a condition of the doubled structure at the ends of X; Y carries
/// S(I − P)S.  Each collar is stretched by R at both ends.
VerdictReport adiabatic_eta_gluing(const TangentialStructure& T, const GluingGeometry& geometry,
                                   const GrassmannianPoint& P, const std::vector<double>& R_list,
                                   double window, double tolerance = 1e-3);

VerdictReport adiabatic_det_dirichlet(const TangentialStructure& T, const std::vector<double>& R_list,
                                      double window, double tolerance = 1e-3, double base_length = 1.0);

VerdictReport adiabatic_det_aps(const TangentialStructure& T, const std::vector<double>& R_list,
                                double window, double tolerance = 1e-3, double base_length = 1.0);

/// Random Lagrangians from the seeds; APS and the Calderón graph are added
/// when include_special is set (APS needs invertible B).
VerdictReport zeta_at_zero_invariance(const TangentialStructure& T, double length, const PotentialSpec& V,
                                      const std::vector<std::uint64_t>& seeds, double window,
                                      bool include_special = true, double tolerance = 2e-3);

struct ConjugationProblem {
    TangentialStructure T;
    double length_x = 1.0;
    double length_y = 1.0;
    Mat Phi;  ///< n×n unitary with ΦJ = JΦ
    std::string sigma_note = "sigma absorbed into the frames of J";
};

/// e^{2πikφ}Π_i + Π_{−i}: a J-commuting unitary winding k times on E_i.
Mat winding_unitary(const TangentialStructure& T, int k, double phase = 0.125);

VerdictReport conjugation_index(const ConjugationProblem& problem);

using BoundaryLoop = std::function<GrassmannianPoint(double)>;

/// θ ↦ Φ(P0) with its first frame coordinate multiplied by e^{2πiwθ}.
BoundaryLoop phase_loop(const TangentialStructure& doubled, const GrassmannianPoint& P0, int winding);

/// eta_window > 0 also checks that η̃ jumps by the local flow at each crossing.
VerdictReport spectral_flow_vs_winding(const TangentialStructure& T, double length, const BoundaryLoop& loop,
                                       int steps, double eta_window = 0.0, double tolerance = 1e-3);

}  // namespace cylab
