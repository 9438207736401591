#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

import datetime
import json
import os
import sys
import uuid

import numpy as np


### ERRORS ###

class WignernessError(Exception):
    exit_code = 3


class ConfigError(WignernessError, ValueError):
    exit_code = 1


class ModelError(WignernessError, ValueError):
    exit_code = 2


class NotHurwitzError(ModelError):
    pass


class FockDimensionError(ModelError):
    pass


class NumericError(WignernessError, ArithmeticError):
    exit_code = 3


class SingularCovarianceError(NumericError):
    pass


class PositivityLossError(NumericError):
    pass


class TruncationError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


### HELPERS ###

def timestamp():
    return str(datetime.datetime.now()).split('.')[0]


def log(message, verbose=True):
    if verbose:
        print("[%s] %s" % (timestamp(), message))


def warn(message, verbose=True):
    if verbose:
        print("[%s] (Warning) %s" % (timestamp(), message))


def error(message):
    sys.stderr.write("[%s] Error: %s\n" % (timestamp(), message))


def safe_remove(file):
    if os.path.exists(file):
        os.remove(file)


def get_uid():
    '''

    Returns:
        8 digit unique identifier in string

    '''
    return str(uuid.uuid4())[:8]


def tmp_name(path):
    return path + ".tmp" + get_uid()


def write_csv(frame, path):
    '''
    writes a DataFrame atomically, 17 significant digits, with header

    Args:
        frame: pandas DataFrame
        path: destination file

    Returns:
        path

    '''
    tmp = tmp_name(path)
    try:
        frame.to_csv(tmp, float_format="%.17g", index=False)
        os.replace(tmp, path)
    finally:
        safe_remove(tmp)
    return path


def write_json(obj, path):
    tmp = tmp_name(path)
    try:
        with open(tmp, "w") as out:
            json.dump(obj, out, indent=2, sort_keys=True, default=_json_default)
            out.write("\n")
        os.replace(tmp, path)
    finally:
        safe_remove(tmp)
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError("not JSON serializable: %r" % type(obj))


def read_json(path):
    try:
        with open(path, "r") as f:
            return json.load(f)
    except (IOError, OSError) as e:
        raise ConfigError("cannot read %s: %s" % (path, e))
    except ValueError as e:
        raise ConfigError("malformed JSON in %s: %s" % (path, e))


def rk4_step(rhs, y, dt):
    ### classic 4th order one-step method on a flat complex array
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_grid(tFinal, dt):
    '''
    fixed step grid ending exactly at tFinal

    Returns:
        (number of steps, step actually used)

    '''
    if not (tFinal > 0 and dt > 0):
        raise ModelError("t_final and dt must be positive (got %r, %r)" % (tFinal, dt))
    n = max(int(np.ceil(tFinal / dt - 1e-9)), 1)
    return n, tFinal / n
