/** Wire types and codecs for the modeling-session protocol.
 *
 * Server updates arrive as one JSON header frame followed by one binary
 * frame per attachment: f32le positions (3/vertex), f32le normals
 * (3/vertex), then u32le triangle indices (3/triangle).
 */
export function decodeBuffer(data, vertices, triangles) {
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
export function eulerCharacteristic(buffer) {
    const edges = new Set();
    const idx = buffer.indices;
    let maxIndex = -1;
    for (let t = 0; t < idx.length; t += 3) {
        for (let k = 0; k < 3; k++) {
            const a = idx[t + k];
            const b = idx[t + ((k + 1) % 3)];
            if (a > maxIndex)
                maxIndex = a;
            edges.add(a < b ? a * 0x100000000 + b : b * 0x100000000 + a);
        }
    }
    const vertexCount = maxIndex + 1;
    return vertexCount - edges.size + idx.length / 3;
}
export function moveVertex(revision, vertex, position) {
    return { type: "edit", revision, op: "move_vertex", vertex, position };
}
export function insertEdge(revision, c1, c2) {
    return { type: "edit", revision, op: "insert_edge", c1, c2 };
}
export function deleteEdge(revision, edge) {
    return { type: "edit", revision, op: "delete_edge", edge };
}
export function setFrame(revision, owner, scale, rotation, offset = [0, 0, 0]) {
    return { type: "edit", revision, op: "set_frame", owner, scale, rotation, offset };
}
export function setConfig(revision, config) {
    return { type: "edit", revision, op: "set_config", config };
}
export const fullSync = { type: "full_sync" };
