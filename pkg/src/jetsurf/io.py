"""Serialization of meshes, tensor fields, jet fields and reports.

All JSON is emitted with sorted keys and repr-stable floats so repeated
runs with the same inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

SCHEMA_VERSION = 1


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def mesh_payload(surface):
    mesh = surface.mesh
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bolza_mesh",
        "resolution": mesh.resolution,
        "vertices": [_c(z) for z in mesh.verts],
        "triangles": [[int(i) for i in t] for t in mesh.triangles],
        "pairings": [[int(a), int(b), int(g)] for a, b, g in mesh.pairings],
        "metric_density": [float(x) for x in
                           (4.0 / (1 - np.abs(mesh.verts) ** 2) ** 2)],
        "n_primary": int(mesh.n_primary),
        "area": float(surface.area),
    }


def save_mesh(surface, path):
    dump_json(mesh_payload(surface), path)


def tensor_payload(field):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "tensor_field",
        "type": [field.type[0], field.type[1]],
        "values": [_c(z) for z in field.values],
    }


def save_tensor(field, path):
    dump_json(tensor_payload(field), path)


def load_tensor(surface, path):
    from .surface import TensorField
    with open(path) as fh:
        data = json.load(fh)
    if data.get("kind") != "tensor_field":
        raise ValueError("not a tensor file: %s" % path)
    vals = np.array([re + 1j * im for re, im in data["values"]])
    return TensorField(surface, tuple(data["type"]), vals)


def save_jetfield(jf, directory, name):
    """Jet field as {degree_cap, slices:[{a,b,tensor_ref}]} + tensor files."""
    os.makedirs(directory, exist_ok=True)
    slices = []
    for a in range(jf.degree_cap + 1):
        for b in range(jf.degree_cap + 1 - a):
            vals = jf.coeffs[a, b]
            if not np.any(vals):
                continue
            ref = "%s_slice_%d_%d.json" % (name, a, b)
            dump_json({
                "schema_version": SCHEMA_VERSION,
                "kind": "tensor_field",
                "type": [-a, -b],
                "values": [_c(z) for z in vals],
            }, os.path.join(directory, ref))
            slices.append({"a": a, "b": b, "tensor_ref": ref})
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "jet_field",
        "degree_cap": jf.degree_cap,
        "slices": slices,
    }
    path = os.path.join(directory, "%s.json" % name)
    dump_json(payload, path)
    return path


def load_jetfield(base, directory, name):
    from .jets import JetField
    with open(os.path.join(directory, "%s.json" % name)) as fh:
        data = json.load(fh)
    jf = JetField(base, data["degree_cap"])
    for s in data["slices"]:
        with open(os.path.join(directory, s["tensor_ref"])) as fh:
            tdata = json.load(fh)
        vals = np.array([re + 1j * im for re, im in tdata["values"]])
        jf.coeffs[s["a"], s["b"]] = vals
    return jf


def flow_report_payload(record):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "flow_report",
        "steps_per_unit": record.steps_per_unit,
        "aborted": bool(record.aborted),
        "times": [float(t) for t in record.times],
        "sup_norms": [{str(k): v for k, v in row.items()}
                      for row in record.sup_norms],
        "displacement": ({str(k): v for k, v in record.displacement().items()}
                         if record.final is not None else None),
    }


def save_flow_csv(record, path):
    """Per-step sup-norm trace, one row per recorded step."""
    ks = sorted(record.sup_norms[0].keys()) if record.sup_norms else []
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["time"] + ["sup_mu_%d" % k for k in ks])
        for t, row in zip(record.times, record.sup_norms):
            wr.writerow(["%.17g" % t] + ["%.17g" % row[k] for k in ks])


def holonomy_payload(hol):
    Q, resid, sig = hol.invariant_form_fit()
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "holonomy_report",
        "matrices": {k: [[float(x) for x in row] for row in m]
                     for k, m in hol.matrices.items()},
        "base_letters": {k: [[float(x) for x in row] for row in m]
                         for k, m in hol.base_letters.items()},
        "traces": hol.trace_table(),
        "relation_defect": hol.relation_defect(),
        "det_defect": hol.det_defect(),
        "invariant_form": {
            "matrix": [[float(x) for x in row] for row in Q],
            "residual": resid,
            "signature": list(sig),
        },
    }
