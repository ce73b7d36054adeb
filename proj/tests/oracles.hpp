#pragma once

// Frozen expected values shared by the unit and integration suites.
//
// Every constant here was produced by an independent implementation of the
// same quantity (closed-form algebra, a reference statistics stack, or a
// hand computation), then frozen. Tests compare the library against these
// numbers; they must never be regenerated from the library itself.

#include <array>
#include <cstddef>
#include <cstdint>

namespace oracle {

// ---------------------------------------------------------------------------
// Tail probabilities.
// ---------------------------------------------------------------------------

struct TailCase {
  double x;
  double df;
  double sf;
};

// Chi-squared survival function on a pinned grid (df in {1, 2, 5}).
inline constexpr std::array<TailCase, 30> kChi2Grid = {{
    {0.001, 1, 0.97477287936996039},
    {0.1, 1, 0.75182963404584928},
    {0.5, 1, 0.47950012218695346},
    {1.0, 1, 0.3173105078629141},
    {2.5, 1, 0.11384629800665805},
    {3.8415, 1, 0.04999877207122227},
    {5.9915, 1, 0.014374973515857654},
    {10.0, 1, 0.0015654022580025497},
    {25.0, 1, 5.7330314375838782e-7},
    {50.0, 1, 1.5374597944280349e-12},
    {0.001, 2, 0.99950012497916927},
    {0.1, 2, 0.95122942450071401},
    {0.5, 2, 0.77880078307140487},
    {1.0, 2, 0.60653065971263342},
    {2.5, 2, 0.2865047968601901},
    {3.8415, 2, 0.1464970481316541},
    {5.9915, 2, 0.049999113685555175},
    {10.0, 2, 0.0067379469990854671},
    {25.0, 2, 3.726653172078671e-6},
    {50.0, 2, 1.3887943864964021e-11},
    {0.001, 5, 0.99999999831851228},
    {0.1, 5, 0.99983768338807738},
    {0.5, 5, 0.99212329323262959},
    {1.0, 5, 0.96256577324729637},
    {2.5, 5, 0.77649507112332271},
    {3.8415, 5, 0.57245442275885571},
    {5.9915, 5, 0.30704688434662715},
    {10.0, 5, 0.075235246146512179},
    {25.0, 5, 0.00013933379118562617},
    {50.0, 5, 1.3857973367009593e-9},
}};

// Student-t survival function on a pinned grid (df in {3, 13, 97}).
inline constexpr std::array<TailCase, 21> kTGrid = {{
    {0.0, 3, 0.5},
    {0.5, 3, 0.3257239824240755},
    {1.0, 3, 0.19550110947788532},
    {2.0, 3, 0.069662984279421588},
    {2.5076, 3, 0.043560699560210951},
    {5.0, 3, 0.0076962190366511505},
    {10.0, 3, 0.001064199529207075},
    {0.0, 13, 0.5},
    {0.5, 13, 0.31271567054060787},
    {1.0, 13, 0.16778063893271125},
    {2.0, 13, 0.033420178824127122},
    {2.5076, 13, 0.013105170043238731},
    {5.0, 13, 0.00012147700290960308},
    {10.0, 13, 8.9962150414584315e-8},
    {0.0, 97, 0.5},
    {0.5, 97, 0.30910374226859543},
    {1.0, 97, 0.15989930558083556},
    {2.0, 97, 0.024148215987540738},
    {2.5076, 97, 0.0069080677353703869},
    {5.0, 97, 1.2733807413288159e-6},
    {10.0, 97, 6.7034331618049853e-17},
}};

// ---------------------------------------------------------------------------
// Normality test fixture: a fixed 21-value sample and the omnibus statistic
// a reference statistics stack assigns to it.
// ---------------------------------------------------------------------------

inline constexpr std::array<double, 21> kNormalitySample = {
    2.3, 1.8, 3.1, 2.9, 0.7, 1.2, 2.0, 4.5, 3.3, 2.7, 1.5,
    2.2, 3.8, 0.9, 2.6, 1.1, 3.0, 2.4, 1.9, 5.2, 2.8};
inline constexpr double kNormalityZSkew = 1.249700973613;
inline constexpr double kNormalityZKurt = 0.649634229687;
inline constexpr double kNormalityK2 = 1.983777155830;
inline constexpr double kNormalityP = 0.370875601729;

// ---------------------------------------------------------------------------
// Heteroscedasticity fixtures. Both are generated from the library's own
// seeded stream (the recipes live in testutil.hpp); the LM statistics below
// come from an independent implementation of the squared-residual
// regression run on those exact draws.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kBpHomoSeed = 424242;
inline constexpr double kBpHomoLm = 0.539602;
inline constexpr double kBpHomoP = 0.462598;

inline constexpr std::uint64_t kBpHeteroSeed = 515151;
inline constexpr double kBpHeteroLm = 41.2099;

// ---------------------------------------------------------------------------
// Divergence worked values.
// ---------------------------------------------------------------------------

// KL({a: 1} || {a: 3/4, b: 1/4}) = log2(4/3).
inline constexpr double kKlPointMass = 0.4150374992788438;
// JSD({a: 1}, {a: 1/2, b: 1/2}).
inline constexpr double kJsdPointMass = 0.311278124459133;
// JSD of the two bundled fixture corpora after stopword removal: both sides
// are uniform over 8 tokens, 5 of them shared, giving exactly 3/8.
inline constexpr double kJsdFixtureCorpora = 0.375;

// ---------------------------------------------------------------------------
// Size scaling.
// ---------------------------------------------------------------------------

inline constexpr std::array<long, 4> kScaleSizes = {1000, 10000, 25000, 50000};
inline constexpr std::array<double, 4> kScaleMinmax = {
    0.0, 0.1836734693877551, 0.4897959183673469, 1.0};

// ---------------------------------------------------------------------------
// Size-law point prediction: beta = (40, 0.1, -0.5) at s = 1 gives
// 40 * (1/1 + 0.1)^(-0.5) = 40 / sqrt(1.1).
// ---------------------------------------------------------------------------

inline constexpr double kSizeLawPrediction = 38.13850356982369;

// ---------------------------------------------------------------------------
// Cross-validated RMSE on the bundled experiment records (seed 20240,
// k = 10, shuffled folds, size feature only). The linear-family values were
// frozen from an independent reference implementation of the same fold
// protocol; the remaining families were verified against the same reference
// where it converges and pinned from the library's deterministic output
// elsewhere.
// ---------------------------------------------------------------------------

struct CvCell {
  const char* family;
  const char* scheme;
  double overall_rmse;
};

inline constexpr std::array<CvCell, 17> kBundledCvCells = {{
    {"linear", "none", 13.3825},
    {"linear", "by_test", 11.2033},
    {"linear", "by_finetune_test", 3.0357},
    {"poly2", "none", 13.4834},
    {"poly2", "by_test", 11.0932},
    {"poly2", "by_finetune_test", 2.7780},
    {"poly3", "none", 13.6369},
    {"poly3", "by_test", 11.4350},
    {"poly3", "by_finetune_test", 2.7899},
    {"logarithmic", "none", 13.2174},
    {"logarithmic", "by_test", 11.4469},
    {"logarithmic", "by_finetune_test", 2.4346},
    {"scaling_law", "none", 13.4876},
    {"scaling_law", "by_finetune", 13.2261},
    {"scaling_law", "by_test", 11.3507},
    {"scaling_law", "by_lang", 15.0707},
    {"scaling_law", "by_finetune_test", 2.7484},
}};

// Correlation of the scaled size feature with spBLEU over all 99 bundled
// records, and the largest language-distance correlation magnitude.
inline constexpr double kBundledSizeCorrelation = 0.2643;
inline constexpr double kBundledMaxDistCorrelation = 0.0944;

// ---------------------------------------------------------------------------
// Synthetic planted-effect fixture (recipes in testutil.hpp). The
// generating equation is y = 50 - 70 j + 20 s + eps with eps ~ N(0, 1), so
// the normalized multifactor weights must sit near (20, -70) and a cubic
// fit must leave close to unit residual noise.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kPlantedSeed = 99001;
inline constexpr std::size_t kPlantedRows = 200;
inline constexpr double kPlantedWeightSize = 19.8126;
inline constexpr double kPlantedWeightJsd = -69.0142;
inline constexpr double kPlantedPoly3CvRmse = 0.9568;

inline constexpr std::uint64_t kPlantedWideSeed = 880088;
inline constexpr double kPlantedWideWeightSize = 19.9313;
inline constexpr double kPlantedWideWeightJsd = -69.6616;

}  // namespace oracle
