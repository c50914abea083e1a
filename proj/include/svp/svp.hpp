#ifndef SVP_SVP_HPP
#define SVP_SVP_HPP

#include "svp/acoustics.hpp"
#include "svp/constants.hpp"
#include "svp/device.hpp"
#include "svp/protocol.hpp"
#include "svp/settings.hpp"
#include "svp/synth.hpp"
#include "svp/tdc.hpp"
#include "svp/waveform.hpp"

#endif // SVP_SVP_HPP
