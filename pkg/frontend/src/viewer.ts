/** three.js renderer: panorama sphere, pointable audio points, and a
 * rotation-only camera. Pointing at a point starts playback at its spatial
 * position; the session records the trajectory. Works with mouse drag on
 * desktop and, when WebXR is available, with a headset controller ray. */

import * as THREE from 'three';
import { sceneToRenderer } from './axes.js';
import { ExplorationSession } from './session.js';
import { colorFor, type PointState } from './stateMachine.js';
import { parseScene, type SceneManifest } from './types.js';

const PANORAMA_RADIUS = 100;
const POINT_RADIUS = 0.15; // scene units; configurable per deployment

export interface ViewerOptions {
  pointRadius?: number;
  sessionId?: string;
}

export async function fetchScene(url: string): Promise<SceneManifest> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new Error(`failed to fetch scene: ${response.status} ${response.statusText}`);
  }
  return parseScene(await response.json());
}

export class SoundscapeViewer {
  readonly session: ExplorationSession;
  private readonly renderer: THREE.WebGLRenderer;
  private readonly scene3 = new THREE.Scene();
  private readonly camera: THREE.PerspectiveCamera;
  private readonly raycaster = new THREE.Raycaster();
  private readonly listener = new THREE.AudioListener();
  private readonly meshes = new Map<number, THREE.Mesh>();
  private readonly materials = new Map<number, THREE.MeshBasicMaterial>();
  private readonly sounds = new Map<number, THREE.PositionalAudio>();
  private readonly audioLoader = new THREE.AudioLoader();
  private readonly baseUrl: string;
  private pointer = new THREE.Vector2(2, 2); // off-screen until first move
  private dragging = false;
  private yaw = 0;
  private pitch = 0;
  private xrController: THREE.XRTargetRaySpace | null = null;

  constructor(
    private readonly manifest: SceneManifest,
    private readonly canvas: HTMLCanvasElement,
    sceneUrl: string,
    options: ViewerOptions = {},
  ) {
    this.baseUrl = sceneUrl.slice(0, sceneUrl.lastIndexOf('/') + 1);
    this.session = new ExplorationSession(
      manifest,
      options.sessionId ?? `session-${Date.now()}`,
      performance.now(),
      {
        play: (id) => this.playAudio(id),
        stop: (id) => this.sounds.get(id)?.stop(),
        stateChanged: (id, state) => this.applyColor(id, state),
      },
    );

    this.camera = new THREE.PerspectiveCamera(
      75, canvas.clientWidth / canvas.clientHeight, 0.01, PANORAMA_RADIUS * 2);
    this.camera.position.set(0, 0, 0); // listener at the cylinder's center
    this.camera.add(this.listener);
    this.scene3.add(this.camera);

    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.renderer.setSize(canvas.clientWidth, canvas.clientHeight, false);
    this.renderer.xr.enabled = true;

    this.buildPanorama();
    this.buildPoints(options.pointRadius ?? POINT_RADIUS);
    this.bindPointerControls();
    this.renderer.setAnimationLoop(() => this.renderFrame());
  }

  private buildPanorama(): void {
    const geometry = new THREE.SphereGeometry(PANORAMA_RADIUS, 64, 32);
    const material = new THREE.MeshBasicMaterial({ side: THREE.BackSide });
    new THREE.TextureLoader().load(this.baseUrl + this.manifest.panorama, (texture) => {
      texture.colorSpace = THREE.SRGBColorSpace;
      material.map = texture;
      material.needsUpdate = true;
    });
    this.scene3.add(new THREE.Mesh(geometry, material));
  }

  private buildPoints(radius: number): void {
    const geometry = new THREE.SphereGeometry(radius, 16, 12);
    for (const point of this.manifest.points) {
      const material = new THREE.MeshBasicMaterial({
        color: colorFor('unexplored', this.manifest.colors),
      });
      const mesh = new THREE.Mesh(geometry, material);
      mesh.position.set(...sceneToRenderer(point.position));
      mesh.userData.pointId = point.id;
      this.scene3.add(mesh);
      this.meshes.set(point.id, mesh);
      this.materials.set(point.id, material);
    }
  }

  private applyColor(id: number, state: PointState): void {
    this.materials.get(id)?.color.set(colorFor(state, this.manifest.colors));
  }

  private playAudio(id: number): void {
    const existing = this.sounds.get(id);
    if (existing !== undefined) {
      if (existing.isPlaying) {
        existing.stop();
      }
      existing.play();
      return;
    }
    const point = this.manifest.points.find((p) => p.id === id)!;
    const sound = new THREE.PositionalAudio(this.listener);
    sound.setRefDistance(this.manifest.radius);
    sound.onEnded = () => {
      sound.isPlaying = false;
      this.session.playbackComplete(performance.now());
    };
    this.meshes.get(id)!.add(sound);
    this.sounds.set(id, sound);
    this.audioLoader.load(this.baseUrl + point.audio, (buffer) => {
      sound.setBuffer(buffer);
      sound.play();
    });
  }

  /** Rotation-only look controls: dragging changes yaw/pitch, never position. */
  private bindPointerControls(): void {
    this.canvas.addEventListener('pointerdown', () => { this.dragging = true; });
    window.addEventListener('pointerup', () => { this.dragging = false; });
    this.canvas.addEventListener('pointermove', (event) => {
      const rect = this.canvas.getBoundingClientRect();
      this.pointer.set(
        ((event.clientX - rect.left) / rect.width) * 2 - 1,
        -((event.clientY - rect.top) / rect.height) * 2 + 1,
      );
      if (this.dragging) {
        this.yaw -= event.movementX * 0.004;
        this.pitch = THREE.MathUtils.clamp(
          this.pitch - event.movementY * 0.004, -Math.PI / 2, Math.PI / 2);
        this.camera.rotation.set(this.pitch, this.yaw, 0, 'YXZ');
      }
    });
    window.addEventListener('resize', () => {
      this.camera.aspect = this.canvas.clientWidth / this.canvas.clientHeight;
      this.camera.updateProjectionMatrix();
      this.renderer.setSize(this.canvas.clientWidth, this.canvas.clientHeight, false);
    });
  }

  /** Offer the immersive mode when the browser exposes WebXR. */
  async enterVR(): Promise<void> {
    const xr = (navigator as Navigator & { xr?: XRSystem }).xr;
    if (xr === undefined) {
      throw new Error('WebXR is not available in this browser');
    }
    const xrSession = await xr.requestSession('immersive-vr', {
      optionalFeatures: ['local-floor'],
    });
    await this.renderer.xr.setSession(xrSession);
    this.xrController = this.renderer.xr.getController(0);
    this.scene3.add(this.xrController);
  }

  private renderFrame(): void {
    const now = performance.now();
    if (this.renderer.xr.isPresenting && this.xrController !== null) {
      const origin = new THREE.Vector3();
      const direction = new THREE.Vector3(0, 0, -1);
      this.xrController.getWorldPosition(origin);
      direction.applyQuaternion(this.xrController.getWorldQuaternion(new THREE.Quaternion()));
      this.raycaster.set(origin, direction);
    } else {
      this.raycaster.setFromCamera(this.pointer, this.camera);
    }
    const hits = this.raycaster.intersectObjects([...this.meshes.values()], false);
    if (hits.length > 0) {
      this.session.pointerEnter(hits[0].object.userData.pointId as number, now);
    } else {
      this.session.pointerExit(now);
    }
    this.renderer.render(this.scene3, this.camera);
  }

  /** Serialize the session and trigger a trajectory.json download. */
  downloadTrajectory(): void {
    const log = this.session.export(performance.now());
    const blob = new Blob([JSON.stringify(log, null, 2)], { type: 'application/json' });
    const anchor = document.createElement('a');
    anchor.href = URL.createObjectURL(blob);
    anchor.download = 'trajectory.json';
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  }
}
