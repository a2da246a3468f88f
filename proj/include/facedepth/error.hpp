// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <stdexcept>
#include <string>

namespace facedepth
{
    class error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Bad call arguments or configuration values.
    class parameter_error : public error
    {
    public:
        using error::error;
    };

    // Malformed file contents (wrong PNG layout, corrupt model, bad manifest).
    class format_error : public error
    {
    public:
        using error::error;
    };

    // Filesystem failures: missing paths, unwritable outputs.
    class io_error : public error
    {
    public:
        using error::error;
    };

    // Tensor/network shape mismatch.
    class structural_error : public error
    {
    public:
        using error::error;
    };

    // Training diverged (non-finite loss).
    class training_error : public error
    {
    public:
        using error::error;
    };
}
