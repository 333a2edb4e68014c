#pragma once

#include <memory>
#include <string>

#include "axiseg/segmenter.hpp"

namespace axiseg {

// Spawns `command` through /bin/sh and speaks axiseg-seg/1 on its standard
// streams. The handshake runs in the constructor; any mismatch is a
// BackendError carrying the tail of the child's stderr. One process serves
// one request at a time — parallelism means multiple processes.
std::unique_ptr<SliceSegmenter> make_external_segmenter(std::string command,
                                                        ClassMap classes);

} // namespace axiseg
