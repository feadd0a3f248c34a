import { fetchScene, SoundscapeViewer } from './viewer.js';

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const sceneUrl = params.get('scene') ?? 'bundle/scene.json';
  const canvas = document.getElementById('stage') as HTMLCanvasElement;
  const status = document.getElementById('status')!;
  try {
    const manifest = await fetchScene(sceneUrl);
    const viewer = new SoundscapeViewer(manifest, canvas, sceneUrl);
    status.textContent =
      `${manifest.source_id}: ${manifest.points.length} points. ` +
      'Drag to look around; rest the pointer on a point to play it.';
    document.getElementById('download')!.addEventListener('click', () => {
      viewer.downloadTrajectory();
    });
    const vrButton = document.getElementById('enter-vr')!;
    if ('xr' in navigator) {
      vrButton.addEventListener('click', () => {
        viewer.enterVR().catch((err) => { status.textContent = String(err); });
      });
    } else {
      vrButton.setAttribute('disabled', 'disabled');
    }
  } catch (err) {
    status.textContent = `could not load scene: ${err}`;
  }
}

void boot();
