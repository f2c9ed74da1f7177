import assert from "node:assert/strict";
import { test } from "node:test";

import { EditMessage, MeshRecord } from "../src/protocol.js";
import { CornerSelection, FrameSliderTool, facesAtVertex, pickVertex } from "../src/tools.js";

const MESH: MeshRecord = {
  vertices: [
    { id: 0, position: [0, 0, 0] },
    { id: 1, position: [1, 0, 0] },
    { id: 2, position: [0, 1, 0] },
  ],
  faces: [
    { id: 10, vertices: [0, 1, 2] },
    { id: 11, vertices: [2, 1, 0] },
  ],
  edges: [{ id: 5, vertices: [0, 1] }],
};

test("pickVertex returns the closest vertex inside the radius", () => {
  const project = (p: [number, number, number]): [number, number] => [p[0] * 100, p[1] * 100];
  assert.equal(pickVertex(MESH, project, 98, 2), 1);
  assert.equal(pickVertex(MESH, project, 50, 50), null);
  const behind = (p: [number, number, number]) => (p[0] > 0.5 ? null : [0, 0] as [number, number]);
  assert.equal(pickVertex(MESH, behind, 0, 0), 0);
});

test("facesAtVertex lists incident faces", () => {
  assert.deepEqual(facesAtVertex(MESH, 1), [10, 11]);
});

test("corner selection emits an edit on the second pick", () => {
  const tool = new CornerSelection();
  assert.equal(tool.pick({ face: 10, vertex: 0 }, 3), null);
  const edit = tool.pick({ face: 11, vertex: 1 }, 3);
  assert.ok(edit && edit.op === "insert_edge");
  assert.equal(edit.revision, 3);
  assert.equal(tool.first, null);
});

test("picking the same corner twice cancels the selection", () => {
  const tool = new CornerSelection();
  tool.pick({ face: 10, vertex: 0 }, 0);
  assert.equal(tool.pick({ face: 10, vertex: 0 }, 0), null);
  assert.equal(tool.first, null);
});

test("frame slider debounces to the final value", () => {
  const emitted: EditMessage[] = [];
  const scheduled: (() => void)[] = [];
  const tool = new FrameSliderTool(
    { kind: "face", id: 2 },
    (edit) => emitted.push(edit),
    () => 7,
    100,
    (run) => {
      scheduled.push(run);
      const index = scheduled.length - 1;
      return () => {
        scheduled[index] = () => undefined;
      };
    },
  );
  tool.set(1.1, 0.0);
  tool.set(1.2, 0.1);
  tool.set(1.3, 0.2);
  assert.equal(emitted.length, 0);
  scheduled.forEach((run) => run());
  assert.equal(emitted.length, 1);
  const edit = emitted[0];
  assert.ok(edit.op === "set_frame");
  assert.equal(edit.scale, 1.3);
  assert.equal(edit.rotation, 0.2);
  assert.equal(edit.revision, 7);
});
