#pragma once

#include <functional>
#include <vector>

#include "sono/types.hpp"

namespace sono {

// Raised-cosine pulse, peak-normalized to 1 at the center tap.
// Length span_symbols * (fs/fb) + 1; fs must be an integer multiple of fb.
// The removable singularity at |t| = Ts/(2*rolloff) takes its limit value
// (pi/4) * sinc(1/(2*rolloff)).
std::vector<double> design_rc_filter(double fb_hz, double rolloff, double fs_hz,
                                     int span_symbols);

// Kaiser-windowed sinc lowpass with ~atten_db stopband attenuation.
// Cutoff midway between f_pass and f_stop; DC gain normalized to exactly 1.
std::vector<double> kaiser_lowpass(double fs_hz, double f_pass_hz, double f_stop_hz,
                                   double atten_db);

// Odd-length linear-phase (type I) FIR matching |H(f)| = mag(f) by frequency
// sampling; mag is evaluated on [0, fs/2] and mirrored.
std::vector<double> fir_from_magnitude(const std::function<double(double)>& mag, int n_taps,
                                       double fs_hz);

// Odd-length Blackman-windowed Hilbert transformer (type III).
std::vector<double> hilbert_fir(int n_taps);

double bessel_i0(double x);

}  // namespace sono
