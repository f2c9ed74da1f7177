/** Orbit camera: spherical coordinates around a target, perspective
 * projection, and a point projector for picking. Column-major matrices in
 * the WebGL convention. */
export function defaultCamera() {
    return { theta: 0.6, phi: 0.9, distance: 7, target: [0, 0, 0], fov: Math.PI / 5 };
}
export function orbit(camera, dTheta, dPhi) {
    camera.theta += dTheta;
    camera.phi = Math.min(Math.max(camera.phi + dPhi, 0.05), Math.PI - 0.05);
}
export function dolly(camera, factor) {
    camera.distance = Math.min(Math.max(camera.distance * factor, 0.5), 100);
}
export function eyePosition(camera) {
    const sp = Math.sin(camera.phi);
    return [
        camera.target[0] + camera.distance * sp * Math.cos(camera.theta),
        camera.target[1] + camera.distance * sp * Math.sin(camera.theta),
        camera.target[2] + camera.distance * Math.cos(camera.phi),
    ];
}
function sub(a, b) {
    return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}
function cross(a, b) {
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}
function normalize(a) {
    const len = Math.hypot(a[0], a[1], a[2]) || 1;
    return [a[0] / len, a[1] / len, a[2] / len];
}
/** view-projection matrix (column major, z up). */
export function viewProjection(camera, aspect) {
    const eye = eyePosition(camera);
    const f = normalize(sub(camera.target, eye));
    const s = normalize(cross(f, [0, 0, 1]));
    const u = cross(s, f);
    const view = [
        s[0], u[0], -f[0], 0,
        s[1], u[1], -f[1], 0,
        s[2], u[2], -f[2], 0,
        -(s[0] * eye[0] + s[1] * eye[1] + s[2] * eye[2]),
        -(u[0] * eye[0] + u[1] * eye[1] + u[2] * eye[2]),
        f[0] * eye[0] + f[1] * eye[1] + f[2] * eye[2],
        1,
    ];
    const near = 0.05;
    const far = 200;
    const t = 1 / Math.tan(camera.fov / 2);
    const proj = [
        t / aspect, 0, 0, 0,
        0, t, 0, 0,
        0, 0, (far + near) / (near - far), -1,
        0, 0, (2 * far * near) / (near - far), 0,
    ];
    const out = new Float32Array(16);
    for (let col = 0; col < 4; col++) {
        for (let row = 0; row < 4; row++) {
            let acc = 0;
            for (let k = 0; k < 4; k++) {
                acc += proj[k * 4 + row] * view[col * 4 + k];
            }
            out[col * 4 + row] = acc;
        }
    }
    return out;
}
/** World point to canvas pixel, or null when behind the eye. */
export function projectPoint(vp, width, height, p) {
    const x = vp[0] * p[0] + vp[4] * p[1] + vp[8] * p[2] + vp[12];
    const y = vp[1] * p[0] + vp[5] * p[1] + vp[9] * p[2] + vp[13];
    const w = vp[3] * p[0] + vp[7] * p[1] + vp[11] * p[2] + vp[15];
    if (w <= 0)
        return null;
    return [((x / w) * 0.5 + 0.5) * width, (1 - ((y / w) * 0.5 + 0.5)) * height];
}
