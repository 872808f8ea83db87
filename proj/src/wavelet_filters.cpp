#include "surelet/wavelet_filters.hpp"

#include <array>

#include "surelet/error.hpp"

namespace surelet {

namespace {

constexpr std::array<double, 2> kHaar = {0.7071067811865476, 0.7071067811865476};

constexpr std::array<double, 4> kDb2 = {0.48296291314453416, 0.8365163037378079, 0.2241438680420134,
                                        -0.12940952255126037};

constexpr std::array<double, 8> kDb4 = {0.2303778133088965,   0.7148465705529157,  0.6308807679298589,
                                        -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
                                        0.0328830116668852,   -0.010597401785069032};

constexpr std::array<double, 8> kSym4 = {0.0322231006040427,  -0.012603967262037833, -0.09921954357684722,
                                         0.29785779560527736, 0.8037387518059161,    0.49761866763201545,
                                         -0.02963552764599851, -0.07576571478927333};

// Symlet with 8 vanishing moments (16 taps).
constexpr std::array<double, 16> kSym8 = {
    0.0018899503327594609, -0.0003029205147213668, -0.01495225833704823, 0.003808752013890615,
    0.049137179673607506,  -0.027219029917056003,  -0.05194583810770904, 0.3644418948353314,
    0.7771857517005235,    0.4813596512583722,     -0.061273359067658524, -0.1432942383508097,
    0.007607487324917605,  0.03169508781149298,    -0.0005421323317911481, -0.0033824159510061256};

}  // namespace

std::span<const double> lowpass_filter(const std::string& name) {
  if (name == "haar" || name == "db1") return kHaar;
  if (name == "db2") return kDb2;
  if (name == "db4") return kDb4;
  if (name == "sym4") return kSym4;
  if (name == "sym8") return kSym8;
  throw Error(ErrorCode::UnknownFilter, "no wavelet filter named '" + name + "'");
}

std::vector<double> highpass_from_lowpass(std::span<const double> lowpass) {
  const std::size_t n = lowpass.size();
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[n - 1 - k];
  return g;
}

std::vector<std::string> known_filters() { return {"haar", "db2", "db4", "sym4", "sym8"}; }

}  // namespace surelet
