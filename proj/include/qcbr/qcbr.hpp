#pragma once

#include "qcbr/beltrami.hpp"
#include "qcbr/container.hpp"
#include "qcbr/errors.hpp"
#include "qcbr/fourier.hpp"
#include "qcbr/harmonic.hpp"
#include "qcbr/lbs.hpp"
#include "qcbr/locate.hpp"
#include "qcbr/mesh.hpp"
#include "qcbr/mvcodec.hpp"
#include "qcbr/obj_io.hpp"
#include "qcbr/pgm.hpp"
#include "qcbr/solver.hpp"
#include "qcbr/svg.hpp"
#include "qcbr/texcodec.hpp"
