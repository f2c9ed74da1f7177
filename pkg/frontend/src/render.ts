/** Minimal WebGL renderer: headlight-shaded welded mesh with a defect tint,
 * plus screen-space markers for the control mesh drawn on a 2D overlay. */

import { Camera, projectPoint, viewProjection } from "./camera.js";
import { GeometryBuffer, MeshRecord } from "./protocol.js";

const VERTEX_SHADER = `
attribute vec3 position;
attribute vec3 normal;
uniform mat4 viewProjection;
varying vec3 vNormal;
void main() {
  vNormal = normal;
  gl_Position = viewProjection * vec4(position, 1.0);
}
`;

const FRAGMENT_SHADER = `
precision mediump float;
varying vec3 vNormal;
uniform vec3 baseColor;
uniform vec3 eyeDir;
void main() {
  float light = abs(dot(normalize(vNormal), normalize(eyeDir)));
  vec3 color = baseColor * (0.25 + 0.75 * light);
  gl_FragColor = vec4(color, 1.0);
}
`;

export class Renderer {
  private gl: WebGLRenderingContext;
  private program: WebGLProgram;
  private positionBuf: WebGLBuffer;
  private normalBuf: WebGLBuffer;
  private indexBuf: WebGLBuffer;
  private indexCount = 0;

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl");
    if (!gl) throw new Error("WebGL unavailable");
    this.gl = gl;
    this.program = this.link();
    this.positionBuf = gl.createBuffer()!;
    this.normalBuf = gl.createBuffer()!;
    this.indexBuf = gl.createBuffer()!;
    gl.enable(gl.DEPTH_TEST);
  }

  private link(): WebGLProgram {
    const gl = this.gl;
    const compile = (type: number, source: string) => {
      const shader = gl.createShader(type)!;
      gl.shaderSource(shader, source);
      gl.compileShader(shader);
      if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
        throw new Error(gl.getShaderInfoLog(shader) ?? "shader error");
      }
      return shader;
    };
    const program = gl.createProgram()!;
    gl.attachShader(program, compile(gl.VERTEX_SHADER, VERTEX_SHADER));
    gl.attachShader(program, compile(gl.FRAGMENT_SHADER, FRAGMENT_SHADER));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(gl.getProgramInfoLog(program) ?? "link error");
    }
    return program;
  }

  upload(buffer: GeometryBuffer): void {
    const gl = this.gl;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.positionBuf);
    gl.bufferData(gl.ARRAY_BUFFER, buffer.positions, gl.DYNAMIC_DRAW);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.normalBuf);
    gl.bufferData(gl.ARRAY_BUFFER, buffer.normals, gl.DYNAMIC_DRAW);
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, this.indexBuf);
    gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, buffer.indices, gl.DYNAMIC_DRAW);
    this.indexCount = buffer.indices.length;
  }

  draw(camera: Camera, tint: [number, number, number]): Float32Array {
    const gl = this.gl;
    const width = this.canvas.clientWidth || this.canvas.width;
    const height = this.canvas.clientHeight || this.canvas.height;
    if (this.canvas.width !== width) this.canvas.width = width;
    if (this.canvas.height !== height) this.canvas.height = height;
    gl.viewport(0, 0, width, height);
    gl.clearColor(0.07, 0.08, 0.1, 1);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
    const vp = viewProjection(camera, width / Math.max(height, 1));
    if (this.indexCount === 0) return vp;

    gl.useProgram(this.program);
    const loc = (name: string) => gl.getAttribLocation(this.program, name);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.positionBuf);
    gl.enableVertexAttribArray(loc("position"));
    gl.vertexAttribPointer(loc("position"), 3, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ARRAY_BUFFER, this.normalBuf);
    gl.enableVertexAttribArray(loc("normal"));
    gl.vertexAttribPointer(loc("normal"), 3, gl.FLOAT, false, 0, 0);
    gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, this.indexBuf);

    gl.uniformMatrix4fv(gl.getUniformLocation(this.program, "viewProjection"), false, vp);
    gl.uniform3fv(gl.getUniformLocation(this.program, "baseColor"), tint);
    const eye = [Math.cos(camera.theta), Math.sin(camera.theta), Math.cos(camera.phi)];
    gl.uniform3fv(gl.getUniformLocation(this.program, "eyeDir"), eye);
    gl.drawElements(gl.TRIANGLES, this.indexCount, gl.UNSIGNED_INT, 0);
    return vp;
  }

  enableUintIndices(): void {
    this.gl.getExtension("OES_element_index_uint");
  }
}

/** Control-mesh markers on the 2D overlay canvas. */
export function drawOverlay(
  overlay: HTMLCanvasElement,
  mesh: MeshRecord | null,
  vp: Float32Array,
  selectedVertex: number | null,
  cornerFace: number | null,
): void {
  const ctx = overlay.getContext("2d");
  if (!ctx) return;
  const { width, height } = overlay;
  ctx.clearRect(0, 0, width, height);
  if (!mesh) return;
  for (const v of mesh.vertices) {
    const p = projectPoint(vp, width, height, v.position);
    if (!p) continue;
    ctx.beginPath();
    ctx.arc(p[0], p[1], v.id === selectedVertex ? 7 : 4, 0, Math.PI * 2);
    ctx.fillStyle = v.id === selectedVertex ? "#ffcf4d" : "rgba(255,255,255,0.75)";
    ctx.fill();
  }
  if (cornerFace !== null) {
    const face = mesh.faces.find((f) => f.id === cornerFace);
    if (face) {
      ctx.strokeStyle = "#5dd3ff";
      ctx.lineWidth = 2;
      ctx.beginPath();
      face.vertices.forEach((vid, k) => {
        const v = mesh.vertices.find((mv) => mv.id === vid);
        if (!v) return;
        const p = projectPoint(vp, width, height, v.position);
        if (!p) return;
        if (k === 0) ctx.moveTo(p[0], p[1]);
        else ctx.lineTo(p[0], p[1]);
      });
      ctx.closePath();
      ctx.stroke();
    }
  }
}
