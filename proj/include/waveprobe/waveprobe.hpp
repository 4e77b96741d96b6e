// Umbrella header.
#pragma once

#include "waveprobe/activations.hpp"
#include "waveprobe/audio.hpp"
#include "waveprobe/common.hpp"
#include "waveprobe/corpus.hpp"
#include "waveprobe/dsp/band_energy.hpp"
#include "waveprobe/dsp/biquad.hpp"
#include "waveprobe/dsp/crossover.hpp"
#include "waveprobe/dsp/f0.hpp"
#include "waveprobe/dsp/fft.hpp"
#include "waveprobe/dsp/lpc.hpp"
#include "waveprobe/dsp/stft.hpp"
#include "waveprobe/feature_track.hpp"
#include "waveprobe/generate.hpp"
#include "waveprobe/model.hpp"
#include "waveprobe/probes/metrics.hpp"
#include "waveprobe/probes/probe.hpp"
#include "waveprobe/probes/regression.hpp"
#include "waveprobe/svd.hpp"
#include "waveprobe/train.hpp"
#include "waveprobe/wav_io.hpp"
#include "waveprobe/wavenet.hpp"
