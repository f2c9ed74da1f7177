"""Open a hole through a cube by inserting one edge.

Inserting an edge between corners of two opposite faces merges them into a
single ten-sided face; the smoothed surface then carries a genus-1 hole
whose rim is governed by a 10-valent extraordinary vertex.
"""

from pathlib import Path

from patchsmith import CornerRef, corpus
from patchsmith.frames import assign_frames
from patchsmith.patches import build_patches
from patchsmith.tessellate import export_obj, tessellate

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

mesh = corpus.cube()
print(f"before: F={mesh.face_count} chi={mesh.euler_characteristic()} genus={mesh.genus()}")

mesh.insert_edge(CornerRef(face=1, vertex=6), CornerRef(face=0, vertex=0))
sides = sorted(mesh.face_sides(f) for f in mesh.faces)
print(f"after:  F={mesh.face_count} chi={mesh.euler_characteristic()} "
      f"genus={mesh.genus()} face sides={sides}")

patchset = build_patches(mesh, assign_frames(mesh))
valences = sorted({meta.valence for p in patchset.patches.values()
                   for meta in p.corners.values()})
print(f"corner valences present: {valences} (the 10 comes from the merged face)")

surface = tessellate(patchset, max_depth=3, leaf_resolution=5)
print(f"surface: chi={surface.euler_characteristic()} genus={surface.genus()} "
      f"closed={surface.is_closed_manifold()}")

path = out_dir / "cube_hole_smooth.obj"
path.write_bytes(export_obj(surface))
print(f"wrote {path}")
