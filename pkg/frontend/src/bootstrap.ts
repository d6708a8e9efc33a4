// DOM entry point: wires clicks to App commands via data-cmd attributes.

import { HttpApiClient } from './api.js';
import { App } from './app.js';
import type { ProblemBundle } from './types.js';

function apiBase(): string {
  const param = new URLSearchParams(window.location.search).get('api');
  return param ?? 'http://127.0.0.1:8000';
}

async function exampleBundle(): Promise<ProblemBundle> {
  const response = await fetch('./src/fixtures/example-bundle.json');
  if (!response.ok) throw new Error('example bundle not found');
  return (await response.json()) as ProblemBundle;
}

function main(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  const app = new App(new HttpApiClient(apiBase()), (html) => {
    root.innerHTML = html;
  });
  app.paint();

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest('[data-cmd]');
    if (!(target instanceof HTMLElement)) return;
    const cmd = target.dataset.cmd;
    switch (cmd) {
      case 'load-example':
        void exampleBundle().then((bundle) => app.loadProblem(bundle));
        break;
      case 'load-custom': {
        const input = document.getElementById('bundle-input') as HTMLTextAreaElement | null;
        if (input) {
          void app.loadProblem(JSON.parse(input.value) as ProblemBundle);
        }
        break;
      }
      case 'solve':
        void app.solve();
        break;
      case 'start-session': {
        const select = document.getElementById('ground-truth') as HTMLSelectElement | null;
        void app.startSession(select?.value ?? '');
        break;
      }
      case 'choose':
        void app.choose(target.dataset.action ?? '', Number(target.dataset.successor));
        break;
      case 'toggle-graph':
        void app.toggleGraph();
        break;
      case 'end-session':
        void app.endSession();
        break;
    }
  });
}

main();
