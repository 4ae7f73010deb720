import { makeApiClient } from './api.js';
import { setupApp } from './app.js';

declare global {
  interface Window {
    __CLAIMCHECK_API_BASE__?: string;
  }
}

document.addEventListener('DOMContentLoaded', () => {
  const base = window.__CLAIMCHECK_API_BASE__ ?? '';
  setupApp(document, makeApiClient(window.fetch.bind(window), base));
});
