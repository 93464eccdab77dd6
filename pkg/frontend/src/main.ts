import { App } from './app.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');

const app = new App(root, { fetch: window.fetch.bind(window) });
void app.init();
