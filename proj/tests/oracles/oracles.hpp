#pragma once

// Generated by gen_oracles.py (mpmath, 50 working digits). Do not edit.

namespace ebl::oracle {

inline constexpr double kPhi_1_4 = 0.9192433407662289535038113693652293102408;
inline constexpr double kPhi_inv_sqrt2 = 0.7602499389065232688413733269459822643682;
inline constexpr double kPhi_1 = 0.8413447460685429485852325456320379224779;
inline constexpr double kPhi_2_3 = 0.98927588997832419460764451613718545845;
inline constexpr double kStrictIntervalDeficit = 0.322931341687449038137421543221672690932;
inline constexpr double kStrictIntervalC_half = 0.2595578768802357206362581663622437738982;
inline constexpr double kInvertSlope = 0.5773502691896257645091487805019574556476;
inline constexpr double kConcaveHeat = 0.404324497307115589792521382448754120305;
inline constexpr double kConcaveHeatSlope = -0.1407958635485632107997621224226609000164;
inline constexpr double kTwoIntervalHeat = 0.3061414016353167919888527682402264470962;

}  // namespace ebl::oracle
