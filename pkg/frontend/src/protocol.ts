/** Wire types and codecs for the modeling-session protocol.
 *
 * Server updates arrive as one JSON header frame followed by one binary
 * frame per attachment: f32le positions (3/vertex), f32le normals
 * (3/vertex), then u32le triangle indices (3/triangle).
 */

export interface AttachmentMeta {
  kind: "patch" | "welded";
  patch?: number;
  vertices: number;
  triangles: number;
}

export interface MeshVertex {
  id: number;
  position: [number, number, number];
}

export interface MeshRecord {
  vertices: MeshVertex[];
  faces: { id: number; vertices: number[] }[];
  edges: { id: number; vertices: [number, number] }[];
}

export interface DefectSummary {
  eq1_gap: number;
  eq2_residual: number;
  ev_boundary_c1: number;
  ev_boundary_g1: number;
  ev_normal_spread: number;
}

export interface UpdateHeader {
  type: "update";
  revision: number;
  changed: number[];
  defect_summary: DefectSummary;
  stats: Record<string, number | string>;
  attachments: AttachmentMeta[];
  mesh?: MeshRecord;
}

export interface HelloMessage {
  type: "hello";
  revision: number;
  patches: number;
}

export interface ErrorMessage {
  type: "error";
  error: string;
  message: string;
  revision: number;
}

export type ServerMessage = UpdateHeader | HelloMessage | ErrorMessage;

export interface GeometryBuffer {
  positions: Float32Array;
  normals: Float32Array;
  indices: Uint32Array;
}

export function decodeBuffer(data: ArrayBuffer, vertices: number, triangles: number): GeometryBuffer {
  const floats = vertices * 3;
  const expected = floats * 8 + triangles * 12;
  if (data.byteLength < expected) {
    throw new Error(`buffer too short: ${data.byteLength} < ${expected}`);
  }
  return {
    positions: new Float32Array(data, 0, floats),
    normals: new Float32Array(data, floats * 4, floats),
    indices: new Uint32Array(data, floats * 8, triangles * 3),
  };
}

/** Euler characteristic of an indexed triangle soup (post-weld indices). */
export function eulerCharacteristic(buffer: GeometryBuffer): number {
  const edges = new Set<number>();
  const idx = buffer.indices;
  let maxIndex = -1;
  for (let t = 0; t < idx.length; t += 3) {
    for (let k = 0; k < 3; k++) {
      const a = idx[t + k];
      const b = idx[t + ((k + 1) % 3)];
      if (a > maxIndex) maxIndex = a;
      edges.add(a < b ? a * 0x100000000 + b : b * 0x100000000 + a);
    }
  }
  const vertexCount = maxIndex + 1;
  return vertexCount - edges.size + idx.length / 3;
}

export interface CornerRef {
  face: number;
  vertex: number;
  occurrence?: number;
}

export type EditMessage =
  | { type: "edit"; revision: number; op: "move_vertex"; vertex: number; position: number[] }
  | { type: "edit"; revision: number; op: "insert_edge"; c1: CornerRef; c2: CornerRef }
  | { type: "edit"; revision: number; op: "delete_edge"; edge: number }
  | {
      type: "edit"; revision: number; op: "set_frame";
      owner: { kind: string; id: number };
      scale: number; rotation: number; offset: number[];
    }
  | { type: "edit"; revision: number; op: "set_config"; config: Record<string, number | string> };

export function moveVertex(revision: number, vertex: number, position: number[]): EditMessage {
  return { type: "edit", revision, op: "move_vertex", vertex, position };
}

export function insertEdge(revision: number, c1: CornerRef, c2: CornerRef): EditMessage {
  return { type: "edit", revision, op: "insert_edge", c1, c2 };
}

export function deleteEdge(revision: number, edge: number): EditMessage {
  return { type: "edit", revision, op: "delete_edge", edge };
}

export function setFrame(
  revision: number,
  owner: { kind: string; id: number },
  scale: number,
  rotation: number,
  offset: number[] = [0, 0, 0],
): EditMessage {
  return { type: "edit", revision, op: "set_frame", owner, scale, rotation, offset };
}

export function setConfig(revision: number, config: Record<string, number | string>): EditMessage {
  return { type: "edit", revision, op: "set_config", config };
}

export const fullSync = { type: "full_sync" } as const;
